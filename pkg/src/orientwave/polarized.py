"""Polarized waves: the rotationally invariant cubic system for u(x, t) in R^2.

    u_xt + (mu - nu)(u . u_x)_x u + nu [(u . u) u_x]_x - nu (u_x . u_x) u = 0

The Cartesian form evolves w = u_x and rebuilds u from its fixed left value.
The polar form u = (r cos v, r sin v) is kept for cross-validation; it is
singular at r = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .errors import CflViolation, NotOrthogonal, RadialDegeneracy
from .grid import Grid, central_diff, cumulative_trapezoid

U_FLOOR = 1e-6
CFL_MAX = 0.4
PICARD_TOL = 1e-14
PICARD_MAX = 200


@dataclass(frozen=True)
class PolarizedState:
    """Cartesian state; `w` (shape (2, n)) is u_x and `u_left` is u(x_L)."""

    grid: Grid
    w: NDArray
    u_left: NDArray
    mu: float
    nu: float
    time: float = 0.0

    @property
    def u(self) -> NDArray:
        return _rebuild(self.w, self.u_left, self.grid.h)


@dataclass(frozen=True)
class PolarState:
    """Polar state r >= u_floor, angle v."""

    grid: Grid
    r: NDArray
    v: NDArray
    mu: float
    nu: float
    time: float = 0.0

    def to_cartesian(self) -> NDArray:
        return np.stack([self.r * np.cos(self.v), self.r * np.sin(self.v)])


@dataclass(frozen=True)
class CubicState:
    """Scalar state for (u_t + mu u^2 u_x)_x = mu u u_x^2; `w` is u_x."""

    grid: Grid
    w: NDArray
    u_left: float
    mu: float
    time: float = 0.0

    @property
    def u(self) -> NDArray:
        return cumulative_trapezoid(self.w, self.grid.h, self.u_left)


def _rebuild(w: NDArray, u_left: NDArray, h: float) -> NDArray:
    return np.stack([cumulative_trapezoid(w[i], h, float(u_left[i])) for i in range(w.shape[0])])


def polarized_state(grid: Grid, u: NDArray, mu: float, nu: float) -> PolarizedState:
    u = np.asarray(u, dtype=float)
    w = np.stack([central_diff(u[0], grid.h), central_diff(u[1], grid.h)])
    return PolarizedState(grid, w, u[:, 0].copy(), float(mu), float(nu))


def polar_state(grid: Grid, r: NDArray, v: NDArray, mu: float, nu: float) -> PolarState:
    return PolarState(grid, np.asarray(r, dtype=float), np.asarray(v, dtype=float), float(mu), float(nu))


def cubic_state(grid: Grid, u: NDArray, mu: float) -> CubicState:
    u = np.asarray(u, dtype=float)
    return CubicState(grid, central_diff(u, grid.h), float(u[0]), float(mu))


def polar_to_cartesian(state: PolarState) -> PolarizedState:
    return polarized_state(state.grid, state.to_cartesian(), state.mu, state.nu)


# ---------------------------------------------------------------- Cartesian form


def _vector_rhs(w: NDArray, u_left: NDArray, h: float, mu: float, nu: float) -> NDArray:
    """w_t with every x-derivative of a product expanded by the product rule."""
    u = _rebuild(w, u_left, h)
    w_x = np.stack([central_diff(w[0], h), central_diff(w[1], h)])
    uw = np.sum(u * w, axis=0)
    ww = np.sum(w * w, axis=0)
    uu = np.sum(u * u, axis=0)
    u_wx = np.sum(u * w_x, axis=0)
    return -(mu - nu) * (ww + u_wx) * u - nu * (2.0 * uw * w + uu * w_x) + nu * ww * u


def _speed_limit(umax2: float, mu: float, nu: float, h: float) -> float:
    speed = max(abs(mu), abs(nu)) * umax2
    return np.inf if speed == 0.0 else CFL_MAX * h / speed


def vector_cfl(state: PolarizedState) -> float:
    return _speed_limit(float(np.max(np.sum(state.u**2, axis=0))), state.mu, state.nu, state.grid.h)


def polarized_step_vector(state: PolarizedState, dt: float) -> PolarizedState:
    """One RK4 step of the Cartesian system."""
    if dt > vector_cfl(state) * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds the cubic-speed limit {vector_cfl(state):.3e}")
    h, ul, mu, nu = state.grid.h, state.u_left, state.mu, state.nu
    w = state.w
    k1 = _vector_rhs(w, ul, h, mu, nu)
    k2 = _vector_rhs(w + 0.5 * dt * k1, ul, h, mu, nu)
    k3 = _vector_rhs(w + 0.5 * dt * k2, ul, h, mu, nu)
    k4 = _vector_rhs(w + dt * k3, ul, h, mu, nu)
    return replace(state, w=w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), time=state.time + dt)


def polarized_energy(state: PolarizedState) -> float:
    """int (mu - nu)(u . u_x)^2 / 2 + nu (u . u)(u_x . u_x) / 2, conserved by smooth flows."""
    u, w = state.u, state.w
    dens = 0.5 * (state.mu - state.nu) * np.sum(u * w, axis=0) ** 2 + 0.5 * state.nu * np.sum(u * u, axis=0) * np.sum(
        w * w, axis=0
    )
    return state.grid.trapezoid(dens)


def boundary_power(state: PolarizedState) -> float:
    """|u_t(x_R)|^2 / 2, the rate at which the energy changes on the truncated line.

    u is held fixed at x_L, so u_t(x_R) = int w_t dx can be nonzero even when
    w vanishes near both ends.
    """
    w_t = _vector_rhs(state.w, state.u_left, state.grid.h, state.mu, state.nu)
    u_t = np.array([state.grid.trapezoid(w_t[0]), state.grid.trapezoid(w_t[1])])
    return 0.5 * float(u_t @ u_t)


# ---------------------------------------------------------------- scalar cubic


def _cubic_rhs(w: NDArray, u_left: float, h: float, mu: float) -> NDArray:
    u = cumulative_trapezoid(w, h, u_left)
    return -mu * u * w * w - mu * u * u * central_diff(w, h)


def cubic_cfl(state: CubicState) -> float:
    return _speed_limit(float(np.max(state.u**2)), state.mu, 0.0, state.grid.h)


def cubic_hs_step(state: CubicState, dt: float) -> CubicState:
    """One RK4 step of (u_t + mu u^2 u_x)_x = mu u u_x^2 in the variable w = u_x."""
    if dt > cubic_cfl(state) * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds the cubic-speed limit {cubic_cfl(state):.3e}")
    h, ul, mu = state.grid.h, state.u_left, state.mu
    w = state.w
    k1 = _cubic_rhs(w, ul, h, mu)
    k2 = _cubic_rhs(w + 0.5 * dt * k1, ul, h, mu)
    k3 = _cubic_rhs(w + 0.5 * dt * k2, ul, h, mu)
    k4 = _cubic_rhs(w + dt * k3, ul, h, mu)
    return replace(state, w=w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), time=state.time + dt)


def cubic_residual(u_prev: NDArray, u: NDArray, u_next: NDArray, h: float, dt: float, mu: float) -> NDArray:
    """Interior values of (u_t + mu u^2 u_x)_x - mu u u_x^2 by centered differences."""
    u_t = (u_next - u_prev) / (2.0 * dt)
    u_x = central_diff(u, h)
    flux = u_t + mu * u * u * u_x
    return ((flux[2:] - flux[:-2]) / (2.0 * h) - mu * u[1:-1] * u_x[1:-1] ** 2)[1:-1]


# ---------------------------------------------------------------- polar form


def polar_time_derivatives(r: NDArray, v: NDArray, h: float, mu: float, nu: float) -> tuple[NDArray, NDArray]:
    """(r_t, v_t) from the implicit polar system, integrated in x from rest at x_L.

    The two equations are linear in (P, R) = (r_t, v_t):
        P_x = -(mu r^2 r_x)_x + mu r r_x^2 + r v_x (R + 2 nu r^2 v_x)
        R_x = -(nu r^2 v_x)_x - 2 nu r r_x v_x - (r_x R + P v_x) / r
    a Volterra system solved by Picard iteration on cumulative integrals.
    """
    if float(np.min(r)) < U_FLOOR:
        raise RadialDegeneracy(f"min r = {float(np.min(r)):.3e} below the floor {U_FLOOR}")
    r_x = central_diff(r, h)
    v_x = central_diff(v, h)
    f1 = -central_diff(mu * r * r * r_x, h) + mu * r * r_x**2 + 2.0 * nu * r**3 * v_x**2
    f2 = -central_diff(nu * r * r * v_x, h) - 2.0 * nu * r * r_x * v_x
    P = cumulative_trapezoid(f1, h)
    R = cumulative_trapezoid(f2, h)
    for _ in range(PICARD_MAX):
        P_new = cumulative_trapezoid(f1 + r * v_x * R, h)
        R_new = cumulative_trapezoid(f2 - (r_x * R + P * v_x) / r, h)
        change = max(float(np.max(np.abs(P_new - P))), float(np.max(np.abs(R_new - R))))
        P, R = P_new, R_new
        if change <= PICARD_TOL * (1.0 + float(np.max(np.abs(P))) + float(np.max(np.abs(R)))):
            break
    return P, R


def polar_cfl(state: PolarState) -> float:
    return _speed_limit(float(np.max(state.r**2)), state.mu, state.nu, state.grid.h)


def polarized_step_polar(state: PolarState, dt: float) -> PolarState:
    """One RK4 step of the polar system."""
    if dt > polar_cfl(state) * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds the cubic-speed limit {polar_cfl(state):.3e}")
    h, mu, nu = state.grid.h, state.mu, state.nu
    r, v = state.r, state.v
    p1, q1 = polar_time_derivatives(r, v, h, mu, nu)
    p2, q2 = polar_time_derivatives(r + 0.5 * dt * p1, v + 0.5 * dt * q1, h, mu, nu)
    p3, q3 = polar_time_derivatives(r + 0.5 * dt * p2, v + 0.5 * dt * q2, h, mu, nu)
    p4, q4 = polar_time_derivatives(r + dt * p3, v + dt * q3, h, mu, nu)
    r_new = r + dt / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4)
    v_new = v + dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
    if float(np.min(r_new)) < U_FLOOR:
        raise RadialDegeneracy(f"min r = {float(np.min(r_new)):.3e} below the floor {U_FLOOR}")
    return replace(state, r=r_new, v=v_new, time=state.time + dt)


# ---------------------------------------------------------------- cross-product identity


def a4_identity_check(u: NDArray, u_theta: NDArray, u_thetatheta: NDArray, n0: NDArray, tol: float = 1e-12) -> float:
    """max |LHS - RHS| of the cross-product identity for fields orthogonal to n0.

    LHS = [u . (n0 x u'')](n0 x u) + 2 [u . (n0 x u')](n0 x u')
    RHS = (u . u')' u - [(u . u) u']' + (u' . u') u
    Arrays have shape (m, 3); derivatives are supplied analytically.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    u1 = np.atleast_2d(np.asarray(u_theta, dtype=float))
    u2 = np.atleast_2d(np.asarray(u_thetatheta, dtype=float))
    n0 = np.asarray(n0, dtype=float)
    if abs(np.linalg.norm(n0) - 1.0) > 1e-12:
        raise NotOrthogonal("n0 must be a unit vector")
    scale = max(1.0, float(np.max(np.abs(u))))
    for name, f in (("u", u), ("u_theta", u1), ("u_thetatheta", u2)):
        dev = float(np.max(np.abs(f @ n0)))
        if dev > tol * scale:
            raise NotOrthogonal(f"{name} has a component {dev:.3e} along n0")
    dot = lambda a, b: np.sum(a * b, axis=1, keepdims=True)
    n_u = np.cross(n0, u)
    n_u1 = np.cross(n0, u1)
    n_u2 = np.cross(n0, u2)
    lhs = dot(u, n_u2) * n_u + 2.0 * dot(u, n_u1) * n_u1
    d_uu1 = dot(u1, u1) + dot(u, u2)
    d_uu_u1 = 2.0 * dot(u, u1) * u1 + dot(u, u) * u2
    rhs = d_uu1 * u - d_uu_u1 + dot(u1, u1) * u
    return float(np.max(np.abs(lhs - rhs)))
