"""Grid operators, the v -> u transform and the Hamiltonian/Lax checks.

The transform sends v to u = M^{-1}(v_x^2), where M is d^2/dx^2 (Hunter-Saxton)
or d^2/dx^2 - 1 (Camassa-Holm); then m = M u satisfies m_t + m u_x + (m u)_x = 0.
All inverse operators integrate from the left end of the grid.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_banded

from .errors import BlowUpDetected, CflViolation, NegativeDensity, SingularOperator
from .grid import Grid, central_diff, cumulative_trapezoid

CLAMP_TOL = 1e-8
DENSE_LIMIT = 1024


class MKind(str, enum.Enum):
    HS = "hs"
    CH = "ch"


@dataclass(frozen=True)
class Anchor:
    """u(x_L), u_x(x_L) for the HS inverse; u(x_L), u(x_R) for the CH inverse."""

    left_value: float = 0.0
    left_slope: float = 0.0
    right_value: float = 0.0


def _kind(kind) -> MKind:
    return kind if isinstance(kind, MKind) else MKind(str(kind).lower())


def dx(f: NDArray, h: float) -> NDArray:
    return central_diff(f, h)


def dx_inv(f: NDArray, h: float, left: float = 0.0) -> NDArray:
    """int_{x_L}^x f by the trapezoid rule."""
    return cumulative_trapezoid(f, h, left)


def apply_M(u: NDArray, kind, h: float) -> NDArray:
    """Three-point M u; the end rows repeat their neighbours."""
    k = _kind(kind)
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    if k is MKind.CH:
        out[1:-1] -= u[1:-1]
    out[0], out[-1] = out[1], out[-2]
    return out


def solve_M(f: NDArray, kind, h: float, anchor: Anchor = Anchor()) -> NDArray:
    """Discrete inverse of apply_M on the interior rows.

    HS: march u_{i+1} = 2u_i - u_{i-1} + h^2 f_i from u_0 = u_L and the Taylor
    value u_1 = u_L + h s_L + h^2 f_0 / 2 (a double cumulative sum).
    CH: tridiagonal solve with both end values clamped.
    """
    k = _kind(kind)
    n = f.size
    if k is MKind.HS:
        inc = h * anchor.left_slope + h * h * (np.cumsum(f[:-1]) - 0.5 * f[0])
        u = np.empty_like(f, dtype=np.result_type(f, float))
        u[0] = anchor.left_value
        u[1:] = anchor.left_value + np.cumsum(inc)
        return u
    ab = np.zeros((3, n), dtype=float)
    ab[0, 2:] = 1.0 / (h * h)
    ab[1, 1:-1] = -2.0 / (h * h) - 1.0
    ab[2, :-2] = 1.0 / (h * h)
    ab[1, 0] = ab[1, -1] = 1.0
    rhs = np.array(f, dtype=np.result_type(f, float), copy=True)
    rhs[0] = anchor.left_value
    rhs[-1] = anchor.right_value
    try:
        return solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - the matrix is diagonally dominant
        raise SingularOperator(str(exc)) from exc


@dataclass(frozen=True)
class GridOperator:
    """A linear operator on grid functions: Dx, DxInv, M or MInv with its anchoring."""

    kind: str
    grid: Grid
    m_kind: MKind = MKind.HS
    boundary: Anchor = Anchor()

    def __call__(self, f: NDArray) -> NDArray:
        h = self.grid.h
        if self.kind == "Dx":
            return dx(f, h)
        if self.kind == "DxInv":
            return dx_inv(f, h, self.boundary.left_value)
        if self.kind == "M":
            return apply_M(f, self.m_kind, h)
        if self.kind == "MInv":
            return solve_M(f, self.m_kind, h, self.boundary)
        raise ValueError(f"unknown operator kind {self.kind!r}")

    def matrix(self) -> NDArray:
        """Dense matrix of the homogeneous (zero-anchored) operator."""
        n = self.grid.n
        if n > DENSE_LIMIT:
            raise ValueError(f"dense operators are limited to N <= {DENSE_LIMIT}")
        op = replace(self, boundary=Anchor())
        return np.column_stack([op(col) for col in np.eye(n)])


# ---------------------------------------------------------------- transforms


def v_to_u(v: NDArray, kind, grid: Grid, anchor: Anchor = Anchor()) -> NDArray:
    """u = M^{-1}(v_x^2) with the given anchoring."""
    v_x = dx(v, grid.h)
    return solve_M(v_x * v_x, kind, grid.h, anchor)


def u_to_v(m: NDArray, grid: Grid, left: float = 0.0) -> NDArray:
    """v = int sqrt(m), the branch with v_x >= 0; tiny negatives are rounding."""
    m = np.asarray(m, dtype=float)
    low = float(m.min())
    if low < -CLAMP_TOL:
        raise NegativeDensity(f"density dips to {low:.3e}; a real v needs v_x^2 = m >= 0")
    return dx_inv(np.sqrt(np.maximum(m, 0.0)), grid.h, left)


def _interior_dx(f: NDArray, h: float) -> NDArray:
    return (f[2:] - f[:-2]) / (2.0 * h)


def genhs_residual(u0: NDArray, u1: NDArray, kind, dt: float, h: float) -> float:
    """max |m_t + m u_x + (m u)_x| at the half step, m = M u, centered differences."""

    def spatial(u):
        m = apply_M(u, kind, h)
        return m[1:-1] * _interior_dx(u, h) + _interior_dx(m * u, h)

    m0 = apply_M(u0, kind, h)[1:-1]
    m1 = apply_M(u1, kind, h)[1:-1]
    res = (m1 - m0) / dt + 0.5 * (spatial(u0) + spatial(u1))
    return float(np.max(np.abs(res[2:-2])))


# ---------------------------------------------------------------- FD solver


@dataclass(frozen=True)
class UVState:
    grid: Grid
    v: NDArray
    u: NDArray
    sigma_minus: float
    sigma_plus: float
    time: float = 0.0
    w: NDArray | None = None
    sigma_minus_history: Callable[[float], float] | None = None
    anchor_index: int = 0

    def __post_init__(self) -> None:
        if self.w is None:
            object.__setattr__(self, "w", dx(self.v, self.grid.h))

    def sigma_minus_at(self, t: float) -> float:
        if self.sigma_minus_history is None:
            return self.sigma_minus
        return float(self.sigma_minus_history(t))


def _u_from_w(w: NDArray, sigma_minus: float, h: float, anchor_index: int) -> NDArray:
    u = solve_M(w * w, MKind.HS, h, Anchor(0.0, sigma_minus))
    return u - u[anchor_index]


def uv_state(
    grid: Grid,
    v: NDArray,
    sigma_minus: float | Callable[[float], float] = 0.0,
    anchor_x: float | None = None,
) -> UVState:
    """Initial state from v; u is anchored to vanish at anchor_x (default x_L)."""
    history = sigma_minus if callable(sigma_minus) else None
    sm = float(history(0.0)) if history is not None else float(sigma_minus)
    idx = 0 if anchor_x is None else int(np.argmin(np.abs(grid.x - anchor_x)))
    w = dx(v, grid.h)
    u = _u_from_w(w, sm, grid.h, idx)
    sp = sm + grid.trapezoid(w * w)
    return UVState(grid, np.asarray(v, dtype=float), u, sm, sp, 0.0, w, history, idx)


def _advect_rhs(w: NDArray, sigma_minus: float, h: float, idx: int) -> NDArray:
    u = _u_from_w(w, sigma_minus, h, idx)
    flux = u * w
    out = np.zeros_like(w)
    out[1:-1] = -(flux[2:] - flux[:-2]) / (2.0 * h)
    return out


def cfl_limit(state: UVState, cfl: float = 0.4) -> float:
    umax = float(np.max(np.abs(state.u)))
    return np.inf if umax == 0.0 else cfl * state.grid.h / umax


def uveq_fd_step(state: UVState, dt: float, ceiling: float = np.inf) -> UVState:
    """One RK4 step of w_t + (u w)_x = 0 with u = M^{-1}(w^2) anchored at sigma_-.

    v is rebuilt as v(x_L) + int w.  Raises BlowUpDetected once max |u_x|
    exceeds `ceiling`.
    """
    if dt > cfl_limit(state) * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds 0.4 h / max|u| = {cfl_limit(state):.3e}")
    h, idx, t = state.grid.h, state.anchor_index, state.time
    sm = state.sigma_minus_at
    w = state.w
    k1 = _advect_rhs(w, sm(t), h, idx)
    k2 = _advect_rhs(w + 0.5 * dt * k1, sm(t + 0.5 * dt), h, idx)
    k3 = _advect_rhs(w + 0.5 * dt * k2, sm(t + 0.5 * dt), h, idx)
    k4 = _advect_rhs(w + dt * k3, sm(t + dt), h, idx)
    w_new = w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    t_new = t + dt
    s_new = sm(t_new)
    u_new = _u_from_w(w_new, s_new, h, idx)
    v_new = dx_inv(w_new, h, float(state.v[0]))
    u_x = s_new + dx_inv(w_new * w_new, h)
    peak = float(np.max(np.abs(u_x)))
    new = replace(
        state,
        v=v_new,
        u=u_new,
        w=w_new,
        sigma_minus=s_new,
        sigma_plus=float(u_x[-1]),
        time=t_new,
    )
    if not np.isfinite(peak) or peak > ceiling:
        raise BlowUpDetected(f"max|u_x| = {peak:.3e} at t = {t_new:.6g}", t_new, peak)
    return new


def max_gradient(state: UVState) -> float:
    return float(np.max(np.abs(state.sigma_minus + dx_inv(state.w * state.w, state.grid.h))))


def uveq_evolve(
    state: UVState,
    t_end: float,
    cfl: float = 0.4,
    ceiling: float = np.inf,
    gradient_cfl: float = 0.05,
    callback: Callable[[UVState], None] | None = None,
) -> UVState:
    """Adaptive march: dt = min(cfl h / max|u|, gradient_cfl / max|u_x|)."""
    while state.time < t_end - 1e-14:
        dt = min(cfl_limit(state, cfl), gradient_cfl / max(max_gradient(state), 1e-300), t_end - state.time)
        state = uveq_fd_step(state, dt, ceiling)
        if callback is not None:
            callback(state)
    return state


# ---------------------------------------------------------------- Hamiltonian checks


def hamiltonian_H(v: NDArray, kind, grid: Grid) -> float:
    """(1/4) int v_x^2 M^{-1}(v_x^2) with zero anchoring."""
    m = dx(v, grid.h) ** 2
    return 0.25 * grid.trapezoid(m * solve_M(m, kind, grid.h))


def momentum_P(v: NDArray, grid: Grid) -> float:
    return grid.trapezoid(dx(v, grid.h) ** 2)


def _trap_weights(grid: Grid) -> NDArray:
    wts = np.full(grid.n, grid.h)
    wts[0] = wts[-1] = 0.5 * grid.h
    return wts


def self_adjoint_inverse(grid: Grid, kind) -> NDArray:
    """Dense M^{-1} made self-adjoint in the trapezoid inner product.

    A quadratic functional only sees the self-adjoint part of M^{-1}.  For the
    CH operator with clamped ends this is the Dirichlet inverse itself; for HS
    it averages the left- and right-anchored double integrals and shifts the
    kernel to |x - s| / 2 - (x_R - x_L) / 4, so that u_x(x_L) = -u_x(x_R) and
    u(x_L) = -u(x_R).  Paired with `skew_dx_inv` this makes both Hamiltonian
    operators skew-adjoint on the truncated line.
    """
    k = _kind(kind)
    Minv = GridOperator("MInv", grid, k).matrix()
    wts = _trap_weights(grid)
    out = 0.5 * (Minv + (Minv.T * wts[None, :]) / wts[:, None])
    if k is MKind.HS:
        out -= 0.25 * (grid.x_max - grid.x_min) * wts[None, :]
    return out


def skew_dx_inv(f: NDArray, h: float) -> NDArray:
    """(int_{x_L}^x f - int_x^{x_R} f) / 2."""
    c = dx_inv(f, h)
    return c - 0.5 * c[-1]


def hamiltonian_vector_fields(v: NDArray, kind, grid: Grid) -> tuple[NDArray, NDArray]:
    """v_t from both Hamiltonian structures, built from exact discrete gradients.

    first:  d^{-1}(dH/dv)                       with H = (1/4) int v_x^2 M^{-1}(v_x^2)
    second: v_x d^{-1} M^{-1}(v_x dP/dv)        with P = int v_x^2
    Variational derivatives are gradients of the discrete functionals divided
    by the quadrature weights.  Both use `self_adjoint_inverse`; compare with
    `advective_field(v, kind, grid, symmetric=True)`.
    """
    n = grid.n
    if n > DENSE_LIMIT:
        raise ValueError(f"dense operators are limited to N <= {DENSE_LIMIT}")
    h = grid.h
    D = GridOperator("Dx", grid).matrix()
    Minv = self_adjoint_inverse(grid, kind)
    wts = _trap_weights(grid)
    v_x = D @ v
    m = v_x * v_x
    dH_dm = 0.5 * wts * (Minv @ m)
    grad_H = D.T @ (2.0 * v_x * dH_dm)
    grad_P = D.T @ (2.0 * v_x * wts)
    first = skew_dx_inv(grad_H / wts, h)
    second = v_x * skew_dx_inv(Minv @ (v_x * (grad_P / wts)), h)
    return first, second


def advective_field(v: NDArray, kind, grid: Grid, symmetric: bool = False) -> NDArray:
    """-M^{-1}(v_x^2) v_x, the flow both structures should generate."""
    v_x = dx(v, grid.h)
    if symmetric:
        u = self_adjoint_inverse(grid, kind) @ (v_x * v_x)
    else:
        u = solve_M(v_x * v_x, kind, grid.h)
    return -u * v_x


def _spectral_derivative(f: NDArray, h: float, order: int) -> NDArray:
    n = f.size
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=h)
    return np.fft.irfft((1j * k) ** order * np.fft.rfft(f), n=n)


def jacobi_cyclic_check(f: NDArray, g: NDArray, h_fn: NDArray, kind, grid: Grid) -> float:
    """|int (g h_x - h g_x) M f_x + (h f_x - f h_x) M g_x + (f g_x - g f_x) M h_x dx|.

    Test functions must vanish (with their derivatives) near both ends so the
    grid can be treated as one period of a smooth periodic function; spectral
    derivatives and the trapezoid rule are then exact to rounding.
    """
    step = grid.h
    d1 = lambda a: _spectral_derivative(a, step, 1)
    d3 = lambda a: _spectral_derivative(a, step, 3)
    k = _kind(kind)

    def M_of_dx(a):
        out = d3(a)
        return out - d1(a) if k is MKind.CH else out

    fx, gx, hx = d1(f), d1(g), d1(h_fn)
    q = (g * hx - h_fn * gx) * M_of_dx(f) + (h_fn * fx - f * hx) * M_of_dx(g) + (f * gx - g * fx) * M_of_dx(h_fn)
    return abs(float(np.sum(q) * step))


def lax_residual(
    v_slices: tuple[NDArray, NDArray, NDArray],
    u: NDArray,
    w: NDArray,
    grid: Grid,
    dt: float,
    trim: int = 4,
) -> float:
    """max |(L_t - (L A - A L)) w| with L = d^{-1} v_x^2 d^{-1}, A = (u d + d u)/2.

    `v_slices` are v at t - dt, t, t + dt and `u` is u at t; L_t uses the
    centered difference of v_x^2.  `trim` rows at each end are ignored.
    """
    n = grid.n
    if n > DENSE_LIMIT:
        raise ValueError(f"dense operators are limited to N <= {DENSE_LIMIT}")
    h = grid.h
    D = GridOperator("Dx", grid).matrix()
    Di = GridOperator("DxInv", grid).matrix()
    vm, v0, vp = v_slices
    m0 = (D @ v0) ** 2
    m_t = ((D @ vp) ** 2 - (D @ vm) ** 2) / (2.0 * dt)
    L = Di @ (m0[:, None] * Di)
    L_t = Di @ (m_t[:, None] * Di)
    A = 0.5 * (u[:, None] * D + D @ np.diag(u))
    res = L_t @ w - (L @ (A @ w) - A @ (L @ w))
    return float(np.max(np.abs(res[trim:-trim])))


def flux_residual(v0: NDArray, v1: NDArray, u0: NDArray, u1: NDArray, grid: Grid, dt: float) -> float:
    """max |(v_x^2)_t + (u v_x^2 + u_x^2 / 2)_x| at the half step."""
    h = grid.h

    def flux(v, u):
        vx = dx(v, h)
        ux = dx(u, h)
        return u * vx * vx + 0.5 * ux * ux

    m0 = dx(v0, h) ** 2
    m1 = dx(v1, h) ** 2
    res = (m1 - m0)[1:-1] / dt + 0.5 * (_interior_dx(flux(v0, u0), h) + _interior_dx(flux(v1, u1), h))
    return float(np.max(np.abs(res[2:-2])))
