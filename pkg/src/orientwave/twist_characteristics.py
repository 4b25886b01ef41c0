"""Exact smooth solutions of (v_t + u v_x)_x = 0, u_xx = v_x^2 by characteristics.

Characteristic coordinates (xi, tau) satisfy x = X(xi, tau), X_tau = u, v = F(xi).
With eta(xi) = eta_- + int F_xi^2 and the weights

    E_+ = exp(-1/4 int (sigma_+ - sigma_-)),   E_- = 1 / E_+,

the Jacobian J = X_xi is a perfect square in eta,

    J = (c0 + c1 eta)^2 / ((eta_+ - eta_-)(sigma_+ - sigma_-)),
    c0 = eta_+ E_+ - eta_- E_-,   c1 = E_- - E_+,

so X and U = X_tau only need the time-independent moments int 1, int eta
and int eta^2 along xi.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import BPoly, CubicHermiteSpline

from .errors import (
    AfterBlowUp,
    BlowUp,
    ConstantProfile,
    DegenerateJacobian,
    IncompatibleData,
    OutOfWindow,
)
from .profiles import Profile

ETA_PLUS = -1.0
RICCATI_STEPS = 4096
GAUSS_ORDER = 10
BISECTION_RTOL = 1e-12

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_ORDER)


# ---------------------------------------------------------------- Riccati pieces


def riccati_sigma(sigma0: float, bprime: float, t: ArrayLike) -> NDArray | float:
    """Exact solution sigma0 / (1 + sigma0 b' t / 2) of sigma' + b' sigma^2 / 2 = 0."""
    t_arr = np.asarray(t, dtype=float)
    denom = 1.0 + 0.5 * sigma0 * bprime * t_arr
    if np.any(denom <= 0.0):
        t_star = -2.0 / (sigma0 * bprime)
        raise BlowUp(f"Riccati solution blows up at t*={t_star:.12g}", t_star)
    out = sigma0 / denom
    return float(out) if out.ndim == 0 else out


class RiccatiHistory:
    """Callable sigma(t) = sigma0 / (1 + coeff sigma0 t / 2) with its blow-up time."""

    def __init__(self, sigma0: float, coeff: float = 1.0):
        self.sigma0 = float(sigma0)
        self.coeff = float(coeff)
        prod = self.sigma0 * self.coeff
        self.t_star = -2.0 / prod if prod < 0.0 else np.inf

    def __call__(self, t: ArrayLike) -> NDArray:
        t = np.asarray(t, dtype=float)
        return self.sigma0 / (1.0 + 0.5 * self.sigma0 * self.coeff * t)

    def derivative(self, t: ArrayLike) -> NDArray:
        s = self(t)
        return -0.5 * self.coeff * s * s


class ZeroHistory:
    t_star = np.inf

    def __call__(self, t: ArrayLike) -> NDArray:
        return np.zeros_like(np.asarray(t, dtype=float))

    def derivative(self, t: ArrayLike) -> NDArray:
        return np.zeros_like(np.asarray(t, dtype=float))


def _history_derivative(sigma: Callable, t: float) -> float:
    deriv = getattr(sigma, "derivative", None)
    if deriv is not None:
        return float(deriv(t))
    d = 1e-5 * max(1.0, abs(t))
    return float((sigma(t + d) - sigma(t - d)) / (2.0 * d))


def jump_ode_residual(t: NDArray, sigma_plus: NDArray, sigma_minus: NDArray) -> float:
    """max |(s+' + s+^2/2) - (s-' + s-^2/2)| with centered time differences."""
    t = np.asarray(t, dtype=float)
    sp = np.asarray(sigma_plus, dtype=float)
    sm = np.asarray(sigma_minus, dtype=float)
    if not (t.shape == sp.shape == sm.shape) or t.size < 3:
        raise ValueError("series must share a time grid of at least 3 points")
    dt2 = t[2:] - t[:-2]
    lhs = (sp[2:] - sp[:-2]) / dt2 + 0.5 * sp[1:-1] ** 2
    rhs = (sm[2:] - sm[:-2]) / dt2 + 0.5 * sm[1:-1] ** 2
    return float(np.max(np.abs(lhs - rhs)))


def jump_condition_residual(
    t: NDArray,
    slope_minus: NDArray,
    slope_plus: NDArray,
    a2_minus_b2: float = 1.0,
    b_prime: float = 1.0,
) -> float:
    """Residual of d/dt{((a^2-b^2)/b') [s]} + ((a^2-b^2)/2) [s^2] along a constant state.

    `slope_minus`/`slope_plus` are the inner slopes at the far left and far
    right; [.] is right minus left.  With both coefficients equal to one this
    is d[u_x]/dt + [u_x^2]/2.
    """
    t = np.asarray(t, dtype=float)
    jump = np.asarray(slope_plus, dtype=float) - np.asarray(slope_minus, dtype=float)
    jump_sq = np.asarray(slope_plus, dtype=float) ** 2 - np.asarray(slope_minus, dtype=float) ** 2
    ddt = (jump[2:] - jump[:-2]) / (t[2:] - t[:-2])
    res = (a2_minus_b2 / b_prime) * ddt + 0.5 * a2_minus_b2 * jump_sq[1:-1]
    return float(np.max(np.abs(res))) if res.size else 0.0


def integral_jump(q2bbp_over_a2mb2: float, theta: NDArray, psi1_theta: NDArray) -> float:
    """Slope jump predicted from the twist amplitude: K * int psi_1theta^2."""
    return float(q2bbp_over_a2mb2 * np.trapezoid(np.asarray(psi1_theta) ** 2, theta))


def integrate_forced_riccati(
    sigma_minus: Callable,
    sigma_plus0: float,
    horizon: float,
    steps: int = RICCATI_STEPS,
) -> tuple[NDArray, NDArray, NDArray, float]:
    """RK4 for s+' = s-' + s-^2/2 - s+^2/2 together with I' = s+ - s-.

    Returns (t, sigma_plus, I, t_star); t_star is inf unless the difference
    s+ - s- stops being positive or a value becomes non-finite first.
    """
    history_t_star = float(getattr(sigma_minus, "t_star", np.inf))
    end = min(horizon, history_t_star)
    dt = end / steps

    def rhs(t: float, y: NDArray) -> NDArray:
        sm = float(sigma_minus(t))
        dsm = _history_derivative(sigma_minus, t)
        return np.array([dsm + 0.5 * sm * sm - 0.5 * y[0] * y[0], y[0] - sm])

    ts = np.linspace(0.0, end, steps + 1)
    ys = np.empty((steps + 1, 2))
    ys[0] = (sigma_plus0, 0.0)
    t_star = history_t_star
    last = steps
    for i in range(steps):
        t, y = ts[i], ys[i]
        # the final stage would evaluate a blowing-up history exactly at t*
        if i == steps - 1 and np.isfinite(history_t_star) and end >= history_t_star:
            last = i
            break
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = rhs(t + dt, y + dt * k3)
        ys[i + 1] = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        gap = ys[i + 1, 0] - float(sigma_minus(ts[i + 1]))
        if not np.all(np.isfinite(ys[i + 1])) or gap <= 0.0:
            t_star = min(t_star, ts[i + 1])
            last = i
            break
    return ts[: last + 1], ys[: last + 1, 0], ys[: last + 1, 1], t_star


# ---------------------------------------------------------------- xi quadrature


class EtaMap:
    """High-accuracy eta(xi) = eta_- + int F_xi^2 and its moments from an anchor.

    Node values come from nested Gauss-Legendre panels; between nodes a
    quintic Hermite interpolant uses the exact derivatives of each quantity.
    Outside the window F_xi vanishes and the maps continue analytically.
    """

    def __init__(self, F: Profile, window: tuple[float, float], eta_minus: float, anchor: float = 0.0, panels: int = 2048):
        lo, hi = map(float, window)
        if not hi > lo:
            raise ValueError("window must have positive length")
        self.F = F
        self.lo, self.hi = lo, hi
        self.anchor = float(anchor)
        self.eta_minus = float(eta_minus)
        nodes = np.linspace(lo, hi, panels + 1)
        self.nodes = nodes
        half = 0.5 * np.diff(nodes)
        mid = 0.5 * (nodes[1:] + nodes[:-1])
        gx = mid[:, None] + half[:, None] * _GL_NODES[None, :]

        dens = lambda x: self.F.derivative(x, 1) ** 2
        panel_eta = (half[:, None] * _GL_WEIGHTS[None, :] * dens(gx)).sum(axis=1)
        eta_nodes = self.eta_minus + np.concatenate([[0.0], np.cumsum(panel_eta)])
        # eta at the Gauss points of each panel, by Gauss rules on sub-intervals
        sub_half = 0.5 * (gx - nodes[:-1, None])
        sub_mid = nodes[:-1, None] + sub_half
        sx = sub_mid[..., None] + sub_half[..., None] * _GL_NODES
        eta_g = eta_nodes[:-1, None] + (sub_half[..., None] * _GL_WEIGHTS * dens(sx)).sum(axis=-1)
        m1 = (half[:, None] * _GL_WEIGHTS * eta_g).sum(axis=1)
        m2 = (half[:, None] * _GL_WEIGHTS * eta_g**2).sum(axis=1)
        I1_nodes = np.concatenate([[0.0], np.cumsum(m1)])
        I2_nodes = np.concatenate([[0.0], np.cumsum(m2)])

        Fx = F.derivative(nodes, 1)
        Fxx = F.derivative(nodes, 2)
        e1 = Fx**2
        e2 = 2.0 * Fx * Fxx
        self._eta = BPoly.from_derivatives(nodes, np.column_stack([eta_nodes, e1, e2]))
        self._I1 = BPoly.from_derivatives(nodes, np.column_stack([I1_nodes, eta_nodes, e1]))
        self._I2 = BPoly.from_derivatives(nodes, np.column_stack([I2_nodes, eta_nodes**2, 2.0 * eta_nodes * e1]))
        self.eta_plus = float(eta_nodes[-1])
        # shift the moments so they vanish at the anchor
        self._I1_at_anchor = 0.0
        self._I2_at_anchor = 0.0
        _, i1, i2 = self.moments(np.array([self.anchor]))
        self._I1_at_anchor, self._I2_at_anchor = float(i1[0]), float(i2[0])

    @property
    def total(self) -> float:
        return self.eta_plus - self.eta_minus

    def eta(self, xi: ArrayLike) -> NDArray:
        xi = np.asarray(xi, dtype=float)
        return self._eta(np.clip(xi, self.lo, self.hi))

    def moments(self, xi: ArrayLike) -> tuple[NDArray, NDArray, NDArray]:
        """(xi - anchor, int_anchor^xi eta, int_anchor^xi eta^2)."""
        xi = np.asarray(xi, dtype=float)
        inside = np.clip(xi, self.lo, self.hi)
        over = np.maximum(xi - self.hi, 0.0)
        under = np.minimum(xi - self.lo, 0.0)
        ep, em = self.eta_plus, self.eta_minus
        I1 = self._I1(inside) + ep * over + em * under - self._I1_at_anchor
        I2 = self._I2(inside) + ep * ep * over + em * em * under - self._I2_at_anchor
        return xi - self.anchor, I1, I2


# ---------------------------------------------------------------- smooth solution


@dataclass(frozen=True)
class TimeWeights:
    sigma_plus: float
    sigma_minus: float
    dsigma_plus: float
    dsigma_minus: float
    E_plus: float
    E_minus: float

    @property
    def gap(self) -> float:
        return self.sigma_plus - self.sigma_minus


class CharSolution:
    """Smooth solution for data F, sigma_-(t) and sigma_+(0) built from characteristics."""

    def __init__(
        self,
        F: Profile,
        sigma_minus: Callable,
        sigma_plus0: float,
        horizon: float,
        window: tuple[float, float] | None = None,
        anchor: float = 0.0,
        eta_plus: float = ETA_PLUS,
        panels: int = 2048,
        steps: int = RICCATI_STEPS,
    ):
        if window is None:
            window = F.support()
        if not np.all(np.isfinite(window)):
            raise ValueError("the profile derivative must have a finite support window")
        probe = EtaMap(F, window, 0.0, anchor, panels)
        total = probe.total
        if total <= 0.0:
            raise ConstantProfile("F is constant; the solution is u = x sigma_+(t), v = F")
        sm0 = float(sigma_minus(0.0))
        if abs(sigma_plus0 - sm0 - total) > 1e-8 * max(1.0, total):
            raise IncompatibleData(
                f"sigma_+(0) - sigma_-(0) = {sigma_plus0 - sm0:.12g} but int F_x^2 = {total:.12g}"
            )
        self.F = F
        self.sigma_minus = sigma_minus
        self.horizon = float(horizon)
        self.eta_plus = float(eta_plus)
        self.eta_minus = self.eta_plus - total
        self.eta_map = EtaMap(F, window, self.eta_minus, anchor, panels)
        self.window = (float(window[0]), float(window[1]))
        self.anchor = float(anchor)

        ts, sp, integ, t_star = integrate_forced_riccati(sigma_minus, sigma_plus0, self.horizon, steps)
        self.t_star = float(t_star)
        self.times = ts
        self.sigma_plus_table = sp
        sm = np.asarray(sigma_minus(ts), dtype=float) * np.ones_like(ts)
        dsm = np.array([_history_derivative(sigma_minus, t) for t in ts])
        dsp = dsm + 0.5 * sm**2 - 0.5 * sp**2
        self._sp = CubicHermiteSpline(ts, sp, dsp)
        self._I = CubicHermiteSpline(ts, integ, sp - sm)
        self.t_max = float(ts[-1])

    # -- time dependence

    def weights(self, t: float) -> TimeWeights:
        if t < 0.0:
            raise ValueError("time must be non-negative")
        if t >= self.t_star:
            raise AfterBlowUp(f"t={t} is past the maximal smooth time t*={self.t_star:.12g}")
        if t > self.t_max * (1.0 + 1e-12):
            raise ValueError(f"t={t} beyond the integrated horizon {self.t_max}")
        sp = float(self._sp(t))
        sm = float(self.sigma_minus(t))
        dsm = _history_derivative(self.sigma_minus, t)
        dsp = dsm + 0.5 * sm * sm - 0.5 * sp * sp
        I = float(self._I(t))
        return TimeWeights(sp, sm, dsp, dsm, float(np.exp(-0.25 * I)), float(np.exp(0.25 * I)))

    def sigma_plus(self, t: ArrayLike) -> NDArray:
        return np.asarray(self._sp(t))

    # -- characteristic fields

    def _coefficients(self, w: TimeWeights) -> tuple[float, float, float, float, float]:
        ep, em = self.eta_plus, self.eta_minus
        c0 = ep * w.E_plus - em * w.E_minus
        c1 = w.E_minus - w.E_plus
        dEp = -0.25 * w.gap * w.E_plus
        dEm = 0.25 * w.gap * w.E_minus
        dc0 = ep * dEp - em * dEm
        dc1 = dEm - dEp
        norm = (ep - em) * w.gap
        return c0, c1, dc0, dc1, norm

    def jacobian(self, xi: ArrayLike, t: float) -> NDArray:
        w = self.weights(t)
        c0, c1, _, _, norm = self._coefficients(w)
        return (c0 + c1 * self.eta_map.eta(xi)) ** 2 / norm

    def X(self, xi: ArrayLike, t: float) -> NDArray:
        w = self.weights(t)
        c0, c1, _, _, norm = self._coefficients(w)
        m0, m1, m2 = self.eta_map.moments(xi)
        return self.anchor + (c0 * c0 * m0 + 2.0 * c0 * c1 * m1 + c1 * c1 * m2) / norm

    def U(self, xi: ArrayLike, t: float) -> NDArray:
        w = self.weights(t)
        c0, c1, dc0, dc1, norm = self._coefficients(w)
        m0, m1, m2 = self.eta_map.moments(xi)
        body = c0 * c0 * m0 + 2.0 * c0 * c1 * m1 + c1 * c1 * m2
        dbody = 2.0 * c0 * dc0 * m0 + 2.0 * (dc0 * c1 + c0 * dc1) * m1 + 2.0 * c1 * dc1 * m2
        dgap = w.dsigma_plus - w.dsigma_minus
        return dbody / norm - body * dgap / (norm * w.gap)

    def u_x(self, xi: ArrayLike, t: float) -> NDArray:
        w = self.weights(t)
        eta = self.eta_map.eta(xi)
        lw = (self.eta_plus - eta) * w.E_plus
        rw = (eta - self.eta_minus) * w.E_minus
        return (lw * w.sigma_minus + rw * w.sigma_plus) / (lw + rw)

    def invert(self, x: ArrayLike, t: float) -> NDArray:
        """Solve X(xi, t) = x for xi by bisection, then polish with Newton steps."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        w = self.weights(t)
        c0, c1, _, _, norm = self._coefficients(w)
        lo, hi = self.window
        width = hi - lo
        X_lo, X_hi = self.X(np.array([lo, hi]), t)
        J_left = (c0 + c1 * self.eta_minus) ** 2 / norm
        J_right = (c0 + c1 * self.eta_plus) ** 2 / norm
        reach_lo = X_lo - width * J_left
        reach_hi = X_hi + width * J_right
        if np.any(x < reach_lo) or np.any(x > reach_hi) or not np.all(np.isfinite(x)):
            raise OutOfWindow(f"x outside the evaluable window [{reach_lo:.6g}, {reach_hi:.6g}] at t={t}")
        xi = np.empty_like(x)
        left = x <= X_lo
        right = x >= X_hi
        mid = ~(left | right)
        xi[left] = lo + (x[left] - X_lo) / J_left
        xi[right] = hi + (x[right] - X_hi) / J_right
        if np.any(mid):
            a = np.full(mid.sum(), lo)
            b = np.full(mid.sum(), hi)
            target = x[mid]
            tol = BISECTION_RTOL * width
            while np.max(b - a) > tol:
                c = 0.5 * (a + b)
                below = self.X(c, t) < target
                a = np.where(below, c, a)
                b = np.where(below, b, c)
            guess = 0.5 * (a + b)
            for _ in range(2):
                step = (self.X(guess, t) - target) / self.jacobian(guess, t)
                guess = np.clip(guess - step, a - tol, b + tol)
            xi[mid] = guess
        return xi

    def sample(self, x: ArrayLike, t: float) -> tuple[NDArray, NDArray, NDArray]:
        """(u, v, u_x) at physical points x and time t."""
        xi = self.invert(x, t)
        return self.U(xi, t), np.asarray(self.F(xi), dtype=float), self.u_x(xi, t)

    def general_data(self) -> "GeneralCharData":
        """Liouville data (A = 1/eta, B from the weights) reproducing this solution."""
        ep, em = self.eta_plus, self.eta_minus
        deta = ep - em

        def parts(t):
            w = self.weights(float(t))
            D = ep * w.E_plus - em * w.E_minus
            dD = -0.25 * w.gap * (ep * w.E_plus + em * w.E_minus)
            return w, D, dD

        def B(t):
            w, D, _ = parts(t)
            return -(w.E_plus - w.E_minus) / D

        def B_tau(t):
            w, D, _ = parts(t)
            # uses E_+ E_- = 1
            return 0.5 * w.gap * deta / D**2

        def B_tautau(t):
            w, D, dD = parts(t)
            dgap = w.dsigma_plus - w.dsigma_minus
            return 0.5 * deta * (dgap / D**2 - 2.0 * w.gap * dD / D**3)

        anchor = self.anchor
        return GeneralCharData(
            A=lambda eta: 1.0 / eta,
            A_eta=lambda eta: -1.0 / eta**2,
            B=B,
            B_tau=B_tau,
            B_tautau=B_tautau,
            F=self.F,
            eta_map=self.eta_map,
            G=lambda t: 0.0,
            H=lambda t: anchor,
            H_tau=lambda t: 0.0,
        )


def build_char_solution(
    F: Profile,
    sigma_minus: Callable,
    sigma_plus0: float,
    horizon: float,
    **kwargs,
) -> CharSolution:
    return CharSolution(F, sigma_minus, sigma_plus0, horizon, **kwargs)


def constant_profile_solution(F0: float, sigma: Callable) -> Callable[[NDArray, float], tuple[NDArray, NDArray, NDArray]]:
    """The linear solution u = x sigma(t), v = F0 used when F is constant."""

    def sample(x: ArrayLike, t: float):
        x = np.asarray(x, dtype=float)
        s = float(sigma(t))
        return x * s, np.full_like(x, F0), np.full_like(x, s)

    return sample


# ---------------------------------------------------------------- formal solution


@dataclass
class GeneralCharData:
    """Arbitrary A(eta), B(tau), F(xi), G(tau), H(tau) for the formal solution."""

    A: Callable
    A_eta: Callable
    B: Callable
    B_tau: Callable
    B_tautau: Callable
    F: Profile
    eta_map: EtaMap
    G: Callable = lambda t: 0.0
    H: Callable = lambda t: 0.0
    H_tau: Callable = lambda t: 0.0


def _segment_integral(fn: Callable[[NDArray], NDArray], xi: NDArray, start: float) -> NDArray:
    """int_start^xi fn for sorted xi, Gauss-Legendre on each gap between points."""
    pts = np.concatenate([[start], xi])
    order = np.argsort(pts, kind="stable")
    sp = pts[order]
    half = 0.5 * np.diff(sp)
    mid = 0.5 * (sp[1:] + sp[:-1])
    gx = mid[:, None] + half[:, None] * _GL_NODES
    seg = (half[:, None] * _GL_WEIGHTS * fn(gx)).sum(axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    where = np.empty_like(order)
    where[order] = np.arange(order.size)
    return cum[where[1:]] - cum[where[0]]


def general_char_solution(
    data: GeneralCharData,
    xi: NDArray,
    tau: NDArray,
    anchor: float = 0.0,
) -> tuple[NDArray, NDArray, NDArray]:
    """Tables X, U, V of shape (len(tau), len(xi)) for the formal solution

        X = -int_anchor^xi F_xi^2 (A+B)^2 / (2 A_xi B_tau) + H,  U = X_tau,  V = F + G,

    using A_xi = A_eta F_xi^2 so the F_xi^2 factors cancel.
    """
    xi = np.asarray(xi, dtype=float)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    X = np.empty((tau.size, xi.size))
    U = np.empty_like(X)
    V = np.empty_like(X)
    Fv = np.asarray(data.F(xi), dtype=float)
    for i, t in enumerate(tau):
        Bv, Bt, Btt = float(data.B(t)), float(data.B_tau(t)), float(data.B_tautau(t))
        if not np.isfinite(Bt) or Bt == 0.0:
            raise DegenerateJacobian(f"B_tau vanishes or is undefined at tau={t}")

        def jac(g):
            eta = data.eta_map.eta(g)
            return -(data.A(eta) + Bv) ** 2 / (2.0 * data.A_eta(eta) * Bt)

        def jac_t(g):
            eta = data.eta_map.eta(g)
            s = data.A(eta) + Bv
            Ae = data.A_eta(eta)
            return -s / Ae + s * s * Btt / (2.0 * Ae * Bt * Bt)

        J = jac(xi)
        if np.any(J > 0.0) and np.any(J < 0.0):
            raise DegenerateJacobian(f"X_xi changes sign at tau={t}; the map is not single-valued")
        X[i] = _segment_integral(jac, xi, anchor) + float(data.H(t))
        U[i] = _segment_integral(jac_t, xi, anchor) + float(data.H_tau(t))
        V[i] = Fv + float(data.G(t))
    return X, U, V


def liouville_residual(data: GeneralCharData, eta: NDArray, tau: NDArray) -> float:
    """max |K_eta_tau - e^K| for e^K = 2 A_eta B_tau / (A+B)^2 by centered differences.

    e^K may be negative, so K is taken on the principal complex branch.
    """
    eta = np.asarray(eta, dtype=float)
    tau = np.asarray(tau, dtype=float)
    Bv = np.array([data.B(t) for t in tau])[:, None]
    Bt = np.array([data.B_tau(t) for t in tau])[:, None]
    expK = 2.0 * data.A_eta(eta)[None, :] * Bt / (data.A(eta)[None, :] + Bv) ** 2
    K = np.log(expK.astype(complex))
    de = eta[2:] - eta[:-2]
    dt = tau[2:] - tau[:-2]
    K_et = (K[2:, 2:] - K[2:, :-2] - K[:-2, 2:] + K[:-2, :-2]) / (dt[:, None] * de[None, :])
    return float(np.max(np.abs(K_et - expK[1:-1, 1:-1])))


# ---------------------------------------------------------------- residual study


def pde_residual(sol: CharSolution, x: NDArray, t: float, dt: float) -> tuple[float, float]:
    """Centered-difference residuals of (v_t + u v_x)_x = 0 and u_xx = v_x^2.

    Samples at t - dt, t, t + dt on the uniform grid x; returns the max-norm of
    each residual over interior nodes.
    """
    h = x[1] - x[0]
    u0, v0, _ = sol.sample(x, t)
    _, vm, _ = sol.sample(x, t - dt)
    _, vp, _ = sol.sample(x, t + dt)
    v_t = (vp - vm) / (2.0 * dt)
    v_x = np.gradient(v0, h)
    flux = v_t + u0 * v_x
    r1 = (flux[2:] - flux[:-2]) / (2.0 * h)
    vx_c = (v0[2:] - v0[:-2]) / (2.0 * h)
    u_xx = (u0[2:] - 2.0 * u0[1:-1] + u0[:-2]) / (h * h)
    r2 = u_xx - vx_c**2
    return float(np.max(np.abs(r1[1:-1]))), float(np.max(np.abs(r2)))
