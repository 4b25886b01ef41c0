"""Finite differences for the coupled 1-D splay/twist angle system.

Unknowns are the polar angle phi(x, t) and the azimuth psi(x, t):

    phi_tt = (a^2 phi_x)_x - a a' phi_x^2 - q^2 b b' psi_x^2 + q q' (psi_t^2 - b^2 psi_x^2)
    psi_tt = (b^2 psi_x)_x - (2 q'/q) (phi_t psi_t - b^2 phi_x psi_x)

The time integrator is a leapfrog (phi^{n+1} = 2 phi^n - phi^{n-1} + dt^2 RHS) written
with half-step velocities so that the velocity-dependent forcing stays explicit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import BPoly

from .coeffs import ElasticConstants, one_d_speeds, speed_arrays
from .errors import AngleOutOfBand, BadBaseAngle, CflViolation
from .grid import Grid, cumulative_trapezoid
from .profiles import Profile

PHI_BAND = (0.05, np.pi - 0.05)
MAX_CFL = 0.5


@dataclass(frozen=True)
class AngleFieldState:
    grid: Grid
    phi: NDArray
    psi: NDArray
    phi_t: NDArray
    psi_t: NDArray
    time: float = 0.0
    band: tuple[float, float] = PHI_BAND
    # half-step velocities from the previous step (None before the first step)
    phi_half: NDArray | None = None
    psi_half: NDArray | None = None
    dt_prev: float | None = None

    def __post_init__(self) -> None:
        for name in ("phi", "psi", "phi_t", "psi_t"):
            arr = getattr(self, name)
            if arr.shape != (self.grid.n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({self.grid.n},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")


def constant_state(grid: Grid, phi0: float, psi0: float = 0.0) -> AngleFieldState:
    n = grid.n
    return AngleFieldState(grid, np.full(n, phi0), np.full(n, psi0), np.zeros(n), np.zeros(n))


def energy(state: AngleFieldState, c: ElasticConstants) -> float:
    """Discrete (1/2) int {phi_t^2 + a^2 phi_x^2 + q^2 (psi_t^2 + b^2 psi_x^2)}.

    Velocity terms use the trapezoid rule on nodes; gradient terms use cell
    differences with face-averaged coefficients, the quadratic form whose
    gradient is the spatial operator of the stepper.
    """
    h = state.grid.h
    a2, _, b2, _, q2, _ = speed_arrays(state.phi, c)
    kinetic = state.grid.trapezoid(state.phi_t**2 + q2 * state.psi_t**2)
    face = lambda arr: 0.5 * (arr[1:] + arr[:-1])
    dphi = np.diff(state.phi) / h
    dpsi = np.diff(state.psi) / h
    potential = h * float(np.sum(face(a2) * dphi**2 + face(q2 * b2) * dpsi**2))
    return 0.5 * (kinetic + potential)


def _flux_divergence(coef: NDArray, f: NDArray, h: float) -> NDArray:
    """(coef f_x)_x at interior nodes with arithmetic face averages."""
    face = 0.5 * (coef[1:] + coef[:-1]) * np.diff(f)
    out = np.zeros_like(f)
    out[1:-1] = (face[1:] - face[:-1]) / (h * h)
    return out


def _rhs_scalar(phi: NDArray, h: float, c: ElasticConstants) -> NDArray:
    a2, aap, _, _, _, _ = speed_arrays(phi, c)
    phi_x = np.zeros_like(phi)
    phi_x[1:-1] = (phi[2:] - phi[:-2]) / (2.0 * h)
    return _flux_divergence(a2, phi, h) - aap * phi_x**2


def _rhs_coupled(
    phi: NDArray, psi: NDArray, phi_t: NDArray, psi_t: NDArray, h: float, c: ElasticConstants
) -> tuple[NDArray, NDArray]:
    a2, aap, b2, bbp, q2, qqp = speed_arrays(phi, c)
    phi_x = np.zeros_like(phi)
    psi_x = np.zeros_like(psi)
    phi_x[1:-1] = (phi[2:] - phi[:-2]) / (2.0 * h)
    psi_x[1:-1] = (psi[2:] - psi[:-2]) / (2.0 * h)
    rhs_phi = _flux_divergence(a2, phi, h) - aap * phi_x**2
    rhs_phi = rhs_phi - q2 * bbp * psi_x**2 + qqp * (psi_t**2 - b2 * psi_x**2)
    # conservative twist form: q^2 psi_tt = (q^2 b^2 psi_x)_x - 2 q q' phi_t psi_t
    rhs_psi = (_flux_divergence(q2 * b2, psi, h) - 2.0 * qqp * phi_t * psi_t) / q2
    rhs_phi[0] = rhs_phi[-1] = 0.0
    rhs_psi[0] = rhs_psi[-1] = 0.0
    return rhs_phi, rhs_psi


def max_speed(phi: NDArray, c: ElasticConstants) -> float:
    a2, _, b2, _, _, _ = speed_arrays(phi, c)
    return float(np.sqrt(max(a2.max(), b2.max())))


def stable_dt(state: AngleFieldState, c: ElasticConstants, cfl: float) -> float:
    if not 0.0 < cfl <= MAX_CFL:
        raise CflViolation(f"CFL number {cfl} outside (0, {MAX_CFL}]")
    return cfl * state.grid.h / max_speed(state.phi, c)


def _check_cfl(state: AngleFieldState, dt: float, c: ElasticConstants) -> None:
    limit = MAX_CFL * state.grid.h / max_speed(state.phi, c)
    if not 0.0 < dt <= limit * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds the CFL limit {limit:.3e}")


def _check_band(phi: NDArray, band: tuple[float, float], time: float) -> None:
    lo, hi = band
    if phi.min() < lo or phi.max() > hi:
        raise AngleOutOfBand(
            f"phi left [{lo:.3f}, {hi:.3f}] at t={time:.6g} (range {phi.min():.4f}..{phi.max():.4f})"
        )


def _leapfrog(
    state: AngleFieldState,
    dt: float,
    rhs: Callable[[NDArray, NDArray, NDArray, NDArray], tuple[NDArray, NDArray]],
) -> AngleFieldState:
    acc_phi, acc_psi = rhs(state.phi, state.psi, state.phi_t, state.psi_t)
    if state.phi_half is None or state.dt_prev != dt:
        # Taylor start: phi^1 = phi^0 + dt phi_t^0 + dt^2/2 RHS^0
        half_phi = state.phi_t + 0.5 * dt * acc_phi
        half_psi = state.psi_t + 0.5 * dt * acc_psi
    else:
        half_phi = state.phi_half + dt * acc_phi
        half_psi = state.psi_half + dt * acc_psi
    phi = state.phi + dt * half_phi
    psi = state.psi + dt * half_psi
    # node velocity at the new level, predicted half a step past the midpoint
    nxt_phi, nxt_psi = rhs(phi, psi, half_phi, half_psi)
    return replace(
        state,
        phi=phi,
        psi=psi,
        phi_t=half_phi + 0.5 * dt * nxt_phi,
        psi_t=half_psi + 0.5 * dt * nxt_psi,
        time=state.time + dt,
        phi_half=half_phi,
        psi_half=half_psi,
        dt_prev=dt,
    )


def step(state: AngleFieldState, dt: float, c: ElasticConstants) -> AngleFieldState:
    """Advance the coupled angle system by one leapfrog step."""
    _check_cfl(state, dt, c)
    _check_band(state.phi, state.band, state.time)
    h = state.grid.h
    new = _leapfrog(state, dt, lambda p, s, pt, st: _rhs_coupled(p, s, pt, st, h, c))
    _check_band(new.phi, new.band, new.time)
    return new


def scalar_step(state: AngleFieldState, dt: float, c: ElasticConstants) -> AngleFieldState:
    """Leapfrog step of phi_tt - (a^2 phi_x)_x + a a' phi_x^2 = 0 (psi frozen)."""
    _check_cfl(state, dt, c)
    h = state.grid.h

    def rhs(p, s, pt, st):
        r = _rhs_scalar(p, h, c)
        r[0] = r[-1] = 0.0
        return r, np.zeros_like(s)

    return _leapfrog(state, dt, rhs)


def evolve(
    state: AngleFieldState,
    c: ElasticConstants,
    t_end: float,
    cfl: float = 0.4,
    stepper: Callable = step,
    callback: Callable[[AngleFieldState], None] | None = None,
) -> AngleFieldState:
    """March to t_end with a uniform step no larger than the initial CFL step."""
    dt = stable_dt(state, c, cfl)
    n_steps = int(np.ceil((t_end - state.time) / dt - 1e-9))
    if n_steps <= 0:
        return state
    dt = (t_end - state.time) / n_steps
    for _ in range(n_steps):
        state = stepper(state, dt, c)
        if callback is not None:
            callback(state)
    return state


@dataclass(frozen=True)
class InitialLayerProfiles:
    theta: NDArray
    F_R: NDArray
    F_L: NDArray
    F_R_theta: NDArray
    F_L_theta: NDArray
    b0: float

    def right_energy(self) -> float:
        """int F_R'^2 dtheta on the table."""
        return float(np.trapezoid(self.F_R_theta**2, self.theta))

    def left_energy(self) -> float:
        return float(np.trapezoid(self.F_L_theta**2, self.theta))


def _derivative(fn: Callable, theta: NDArray) -> NDArray:
    deriv = getattr(fn, "derivative", None)
    if deriv is not None:
        return np.asarray(deriv(theta, 1), dtype=float)
    return np.gradient(np.asarray(fn(theta), dtype=float), theta, edge_order=2)


def initial_layer(f: Callable, g: Callable, b0: float, theta: NDArray) -> InitialLayerProfiles:
    """Split twist data (f, g) into right- and left-moving d'Alembert profiles.

    `theta` must be increasing and extend past the support of g on the right,
    since the tail integral of g is measured from the right end of the table.
    """
    if b0 <= 0.0:
        raise ValueError("b0 must be positive")
    theta = np.asarray(theta, dtype=float)
    fv = np.asarray(f(theta), dtype=float)
    gv = np.asarray(g(theta), dtype=float)
    h = np.diff(theta)
    tail = np.zeros_like(gv)
    tail[:-1] = np.cumsum((0.5 * h * (gv[1:] + gv[:-1]))[::-1])[::-1]
    half_f = 0.5 * fv
    shift = tail / (2.0 * b0)
    f_theta = _derivative(f, theta)
    return InitialLayerProfiles(
        theta=theta,
        F_R=half_f + shift,
        F_L=half_f - shift,
        F_R_theta=0.5 * f_theta - gv / (2.0 * b0),
        F_L_theta=0.5 * f_theta + gv / (2.0 * b0),
        b0=float(b0),
    )


class LayerProfile(Profile):
    """F_R (sign=+1) or F_L (sign=-1) as an analytic profile for the inner problems.

    F = f/2 + sign * (1/(2 b0)) int_theta^inf g.  Derivatives are exact; the tail
    integral comes from Gauss-Legendre panels joined by quintic Hermite pieces.
    """

    def __init__(self, f: Profile, g: Profile, b0: float, sign: int = 1, panels: int = 4096):
        if b0 <= 0.0:
            raise ValueError("b0 must be positive")
        if sign not in (1, -1):
            raise ValueError("sign must be +1 (right-moving) or -1 (left-moving)")
        self.f, self.g, self.b0, self.sign = f, g, float(b0), sign
        lo = min(f.support()[0], g.support()[0])
        hi = max(f.support()[1], g.support()[1])
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise ValueError("layer profiles need compactly supported f and g")
        self._lo, self._hi = lo, hi
        nodes = np.linspace(lo, hi, panels + 1)
        gl_x, gl_w = np.polynomial.legendre.leggauss(8)
        half = 0.5 * np.diff(nodes)
        mid = 0.5 * (nodes[1:] + nodes[:-1])
        pts = mid[:, None] + half[:, None] * gl_x[None, :]
        panel = (half[:, None] * gl_w[None, :] * np.asarray(g(pts), dtype=float)).sum(axis=1)
        tail = np.concatenate([np.cumsum(panel[::-1])[::-1], [0.0]])
        gv = np.asarray(g(nodes), dtype=float)
        g1 = np.asarray(g.derivative(nodes, 1), dtype=float)
        self._tail = BPoly.from_derivatives(nodes, np.column_stack([tail, -gv, -g1]))
        self._tail_total = float(tail[0])

    def _tail_value(self, x: NDArray) -> NDArray:
        inside = self._tail(np.clip(x, self._lo, self._hi))
        return np.where(x < self._lo, self._tail_total, np.where(x > self._hi, 0.0, inside))

    def derivative(self, x, order: int = 1) -> NDArray:
        x = np.asarray(x, dtype=float)
        k = self.sign / (2.0 * self.b0)
        if order == 0:
            return 0.5 * np.asarray(self.f(x), dtype=float) + k * self._tail_value(x)
        return 0.5 * np.asarray(self.f.derivative(x, order), dtype=float) - k * np.asarray(
            self.g.derivative(x, order - 1), dtype=float
        )

    def support(self) -> tuple[float, float]:
        return self._lo, self._hi


def twist_ic(
    epsilon: float,
    phi0: float,
    f: Callable,
    g: Callable,
    grid: Grid,
    c: ElasticConstants,
    band: tuple[float, float] = PHI_BAND,
) -> AngleFieldState:
    """Weakly nonlinear twist data: psi = eps^(1/2) f(x/eps), psi_t = eps^(-1/2) g(x/eps)."""
    if not 0.0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 0.5]")
    sp = one_d_speeds(phi0, c)
    if not band[0] <= phi0 <= band[1]:
        raise BadBaseAngle(f"phi0={phi0} outside the safe band {band}")
    # a0 != b0 and b0' != 0 exclude phi0 = n pi/2
    if abs(sp.a - sp.b) <= 1e-12 * sp.b or abs(sp.b_prime) <= 1e-12:
        raise BadBaseAngle(f"phi0={phi0} gives a0 == b0 or b0' == 0; phi0 must not be n*pi/2")
    x = grid.x
    n = grid.n
    return AngleFieldState(
        grid=grid,
        phi=np.full(n, float(phi0)),
        psi=np.sqrt(epsilon) * np.asarray(f(x / epsilon), dtype=float),
        phi_t=np.zeros(n),
        psi_t=np.asarray(g(x / epsilon), dtype=float) / np.sqrt(epsilon),
        band=band,
    )


def twist_energy_estimate(f: Callable, g: Callable, b0: float, theta: NDArray) -> float:
    """(1/2) int {g^2 + b0^2 f_theta^2} dtheta, the leading twist energy of the data."""
    gv = np.asarray(g(theta), dtype=float)
    ft = _derivative(f, theta)
    return 0.5 * float(np.trapezoid(gv**2 + b0**2 * ft**2, theta))


def dalembert(layer: InitialLayerProfiles, X: NDArray, T: float) -> NDArray:
    """Psi_1(X, T) = F_R(X - b0 T) + F_L(X + b0 T) by table interpolation."""
    th, b0 = layer.theta, layer.b0
    right = np.interp(X - b0 * T, th, layer.F_R, left=layer.F_R[0], right=layer.F_R[-1])
    left = np.interp(X + b0 * T, th, layer.F_L, left=layer.F_L[0], right=layer.F_L[-1])
    return right + left


__all__ = [
    "AngleFieldState",
    "InitialLayerProfiles",
    "LayerProfile",
    "constant_state",
    "cumulative_trapezoid",
    "dalembert",
    "energy",
    "evolve",
    "initial_layer",
    "scalar_step",
    "stable_dt",
    "step",
    "twist_energy_estimate",
    "twist_ic",
]
