"""Matched inner/outer description of fast twist waves (0 < a0 < b0).

Twist data of size eps^(1/2) on the scale eps split into waves on x = +-b0 t.
Inside each wave (theta = (x -+ b0 t)/eps) the angles are

    phi = phi0 + eps phi2(theta, t),   psi = eps^(1/2) psi1(theta, t),

with [psi1_t + b0' phi2 psi1_theta]_theta = 0 and phi2_thetatheta = K psi1_theta^2,
K = q0^2 b0 b0' / (a0^2 - b0^2).  Scaling u = -b0' phi2, v = c psi1 with
c^2 = -b0' K turns this into (v_t + u v_x)_x = 0, u_xx = v_x^2, solved exactly
by CharSolution.  The right wave needs x = -theta (its quiet side is ahead);
the left wave uses x = theta.  Behind each wave the outer slope phi_x tends
to sigma_R(t) or sigma_L(t), both Riccati solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .coeffs import ElasticConstants, one_d_speeds
from .errors import BadBaseAngle, NonStrict
from .oned_pde import AngleFieldState, LayerProfile
from .profiles import Profile, ReflectedScaled
from .twist_characteristics import CharSolution, EtaMap, ZeroHistory

EDGE_TOL = 1e-6
ZERO_ENERGY = 1e-20


@dataclass(frozen=True)
class FastTwistCoefficients:
    phi0: float
    a0: float
    b0: float
    b0_prime: float
    K: float

    @property
    def scale(self) -> float:
        """c with c^2 = -b0' K, the amplitude factor v = c psi1."""
        return float(np.sqrt(-self.b0_prime * self.K))

    def sigma_R(self, t, energy_R: float):
        s0 = -self.K * energy_R
        return s0 / (1.0 + 0.5 * s0 * self.b0_prime * np.asarray(t, dtype=float))

    def sigma_L(self, t, energy_L: float):
        s0 = self.K * energy_L
        return s0 / (1.0 - 0.5 * s0 * self.b0_prime * np.asarray(t, dtype=float))


def fast_twist_coefficients(phi0: float, c: ElasticConstants) -> FastTwistCoefficients:
    if not c.alpha < c.beta:
        raise NonStrict(f"fast twist waves need alpha < beta (got alpha={c.alpha}, beta={c.beta})")
    sp = one_d_speeds(phi0, c)
    if abs(sp.b_prime) <= 1e-12 or abs(np.sin(phi0)) <= 1e-12:
        raise BadBaseAngle(f"phi0={phi0} gives b0' = 0 or q0 = 0; phi0 must not be n*pi/2")
    K = sp.q**2 * sp.b * sp.b_prime / (sp.a**2 - sp.b**2)
    # a0 < b0 makes -K b0' >= 0, so sigma_R0 b0' >= 0 and both slopes stay bounded
    return FastTwistCoefficients(float(phi0), sp.a, sp.b, sp.b_prime, float(K))


class InnerTwist:
    """Leading inner solution (phi2, psi1) of one twist wave."""

    def __init__(self, layer: Profile, coef: FastTwistCoefficients, side: str, horizon: float, panels: int = 2048):
        if side not in ("right", "left"):
            raise ValueError("side must be 'right' or 'left'")
        self.coef = coef
        self.side = side
        self._reflect = side == "right"
        data = ReflectedScaled(layer, coef.scale, reflect=self._reflect)
        window = data.support()
        probe = EtaMap(data, window, 0.0, window[0], panels)
        self.energy = probe.total / coef.scale**2
        # rounding in the layer tail leaves ~1e-33 for a wave that is absent
        if probe.total <= ZERO_ENERGY:
            self.solution = None
            return
        # with sigma_- = 0 the quiet side stays at rest, so anchoring u = 0 at
        # the window edge gives phi2 = 0 ahead of the wave
        self.solution = CharSolution(data, ZeroHistory(), probe.total, horizon, window=window, anchor=window[0], panels=panels)

    def _inner_x(self, theta: NDArray) -> NDArray:
        return -theta if self._reflect else theta

    def fields(self, theta, t: float) -> tuple[NDArray, NDArray]:
        """(phi2, psi1) at inner positions theta."""
        theta = np.asarray(theta, dtype=float)
        if self.solution is None:
            return np.zeros_like(theta), np.zeros_like(theta)
        u, v, _ = self.solution.sample(self._inner_x(theta), t)
        return -u / self.coef.b0_prime, v / self.coef.scale

    def sigma(self, t):
        """Outer slope behind the wave."""
        if self.side == "right":
            return self.coef.sigma_R(t, self.energy)
        return self.coef.sigma_L(t, self.energy)

    def trailing_edge(self, t: float) -> float:
        """theta behind which all but EDGE_TOL of the wave energy lies ahead."""
        if self.solution is None:
            return 0.0
        em = self.solution.eta_map
        target = em.eta_plus - EDGE_TOL * em.total
        lo, hi = em.lo, em.hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(em.eta(mid)) < target:
                lo = mid
            else:
                hi = mid
        x_edge = float(self.solution.X(np.array([hi]), t)[0])
        return -x_edge if self._reflect else x_edge

    def leading_edge(self, t: float) -> float:
        if self.solution is None:
            return 0.0
        em = self.solution.eta_map
        target = em.eta_minus + EDGE_TOL * em.total
        lo, hi = em.lo, em.hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if float(em.eta(mid)) < target:
                lo = mid
            else:
                hi = mid
        x_edge = float(self.solution.X(np.array([lo]), t)[0])
        return -x_edge if self._reflect else x_edge


def build_inner_pair(
    f: Profile, g: Profile, coef: FastTwistCoefficients, horizon: float, panels: int = 2048
) -> tuple[InnerTwist, InnerTwist]:
    right = InnerTwist(LayerProfile(f, g, coef.b0, +1), coef, "right", horizon, panels)
    left = InnerTwist(LayerProfile(f, g, coef.b0, -1), coef, "left", horizon, panels)
    return right, left


def _centre(inner: InnerTwist, t: float) -> float:
    b0t = inner.coef.b0 * t
    return b0t if inner.side == "right" else -b0t


def measured_outer_slope(state: AngleFieldState, inner: InnerTwist, epsilon: float, width: float = 2.0) -> float:
    """phi_x of the full solution just behind the wave.

    The difference quotient of phi across theta in [edge - width, edge] (right
    wave) or [edge, edge + width] (left wave), where edge is the trailing
    edge of the inner solution at the state's time.
    """
    t = state.time
    edge = inner.trailing_edge(t)
    if inner.side == "right":
        th0, th1 = edge - width, edge
    else:
        th0, th1 = edge, edge + width
    xc = _centre(inner, t)
    x = state.grid.x
    p0 = float(np.interp(xc + epsilon * th0, x, state.phi))
    p1 = float(np.interp(xc + epsilon * th1, x, state.phi))
    return (p1 - p0) / (epsilon * (th1 - th0))


def composite_discrepancy(state: AngleFieldState, inner: InnerTwist, epsilon: float) -> dict:
    """max |phi - phi0 - eps phi2| and max |psi - eps^(1/2) psi1| over the inner region."""
    t = state.time
    lo, hi = sorted((inner.trailing_edge(t), inner.leading_edge(t)))
    xc = _centre(inner, t)
    x = state.grid.x
    mask = (x >= xc + epsilon * lo) & (x <= xc + epsilon * hi)
    theta = (x[mask] - xc) / epsilon
    phi2, psi1 = inner.fields(theta, t)
    dphi = state.phi[mask] - inner.coef.phi0 - epsilon * phi2
    dpsi = state.psi[mask] - np.sqrt(epsilon) * psi1
    return {
        "phi": float(np.max(np.abs(dphi))) if dphi.size else 0.0,
        "psi": float(np.max(np.abs(dpsi))) if dpsi.size else 0.0,
    }
