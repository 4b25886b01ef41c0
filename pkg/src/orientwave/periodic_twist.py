"""Periodic twist waves coupled to an oscillating mean field.

The mean angle obeys phi_TT + b'(phi) = 0.  Averages over one orbit give the
constants Lambda and M of the periodic (u, v) system

    (v_t + u v_x)_x + mu <v_x^2> v = 0,    u_xx = v_x^2 - <v_x^2>,

with mu = M / Lambda, which is solved pseudo-spectrally on [0, 2 pi).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from .coeffs import ElasticConstants
from .errors import CflViolation, HyperbolicityLoss, NonPeriodicOrbit, ZeroLambda

# Yoshida fourth-order composition weights
_CBRT2 = 2.0 ** (1.0 / 3.0)
_W1 = 1.0 / (2.0 - _CBRT2)
_W0 = -_CBRT2 / (2.0 - _CBRT2)
_YOSHIDA_C = (0.5 * _W1, 0.5 * (_W0 + _W1), 0.5 * (_W0 + _W1), 0.5 * _W1)
_YOSHIDA_D = (_W1, _W0, _W1)

SIN_FLOOR = 1e-3
FIXED_POINT_TOL = 1e-12
CFL_MAX = 0.8


# ---------------------------------------------------------------- speeds along the orbit


def _b(phi, c: ElasticConstants):
    return np.sqrt(c.beta * np.sin(phi) ** 2 + c.gamma * np.cos(phi) ** 2)


def _b_prime(phi, c: ElasticConstants):
    return (c.beta - c.gamma) * np.sin(phi) * np.cos(phi) / _b(phi, c)


def _b_second(phi, c: ElasticConstants):
    b = _b(phi, c)
    bp = _b_prime(phi, c)
    return ((c.beta - c.gamma) * np.cos(2.0 * phi) - bp * bp) / b


def _a2_minus_b2(phi, c: ElasticConstants):
    return (c.alpha - c.beta) * np.sin(phi) ** 2


def small_oscillation_period(c: ElasticConstants) -> float:
    """2 pi / sqrt(b''(pi/2)), the linearized period about the well bottom."""
    curv = float(_b_second(0.5 * np.pi, c))
    if curv <= 0.0:
        raise NonPeriodicOrbit("b has no minimum at pi/2 unless beta < gamma")
    return 2.0 * np.pi / np.sqrt(curv)


# ---------------------------------------------------------------- mean-field orbit


@dataclass(frozen=True)
class MeanFieldOrbit:
    """Uniform table of one period of phi_0(T), starting at an upward crossing of pi/2.

    `phi` and `phi_T` hold `n` samples at T_j = j * period / n.  A fixed point
    has period = nan and a single constant sample.
    """

    phi: NDArray
    phi_T: NDArray
    period: float
    E: float
    energy_drift: float
    closure: float
    constants: ElasticConstants = field(repr=False)

    @property
    def fixed_point(self) -> bool:
        return not np.isfinite(self.period)

    @property
    def dT(self) -> float:
        return self.period / self.phi.size

    def b0_prime(self) -> NDArray:
        return _b_prime(self.phi, self.constants)


def _yoshida_step(phi: float, p: float, dt: float, c: ElasticConstants) -> tuple[float, float]:
    for i in range(3):
        phi += _YOSHIDA_C[i] * dt * p
        p -= _YOSHIDA_D[i] * dt * _b_prime(phi, c)
    phi += _YOSHIDA_C[3] * dt * p
    return phi, p


def _energy(phi, p, c):
    return 0.5 * p * p + _b(phi, c)


def _guard(phi: float, c: ElasticConstants) -> None:
    if abs(np.sin(phi)) < SIN_FLOOR:
        raise HyperbolicityLoss(
            f"orbit reaches phi = {phi:.6g} where sin(phi) ~ 0 and a = b; the expansion breaks down"
        )


def meanfield_orbit(
    phi_init: float,
    phi_T_init: float,
    c: ElasticConstants,
    samples: int = 4096,
    max_periods: float = 20.0,
) -> MeanFieldOrbit:
    """Integrate phi_TT + b'(phi) = 0 symplectically and tabulate one period.

    A first pass with a coarse step locates the next upward crossing of pi/2
    (cubic Hermite interpolation inside the crossing step); the orbit is then
    re-integrated with dt = period / samples so the table is uniform.
    """
    if c.alpha == c.beta:
        raise HyperbolicityLoss("alpha = beta: a = b for every angle")
    _guard(phi_init, c)
    E = float(_energy(phi_init, phi_T_init, c))
    b_mid = float(_b(0.5 * np.pi, c))
    if abs(phi_init - 0.5 * np.pi) < FIXED_POINT_TOL and abs(phi_T_init) < FIXED_POINT_TOL:
        return MeanFieldOrbit(np.array([0.5 * np.pi]), np.array([0.0]), np.nan, E, 0.0, 0.0, c)
    if c.beta >= c.gamma:
        raise HyperbolicityLoss("beta >= gamma: b is minimal at phi = 0, where a = b")
    if E >= np.sqrt(c.gamma):
        raise HyperbolicityLoss(f"energy {E:.6g} clears the barrier b(0) = sqrt(gamma); the orbit reaches phi = 0")
    if E <= b_mid:
        raise NonPeriodicOrbit(f"energy {E:.6g} does not exceed the well bottom b(pi/2) = {b_mid:.6g}")

    p0 = float(np.sqrt(2.0 * (E - b_mid)))
    scale = small_oscillation_period(c)
    dt = scale / 2000.0
    phi, p, t = 0.5 * np.pi, p0, 0.0
    left_start = False
    period = None
    t_max = max_periods * scale * 10.0
    while t < t_max:
        phi_new, p_new = _yoshida_step(phi, p, dt, c)
        _guard(phi_new, c)
        if phi_new < 0.5 * np.pi:
            left_start = True
        if left_start and phi <= 0.5 * np.pi < phi_new:
            period = t + _hermite_root(phi - 0.5 * np.pi, p, phi_new - 0.5 * np.pi, p_new, dt)
            break
        phi, p, t = phi_new, p_new, t + dt
    if period is None:
        raise NonPeriodicOrbit("no return to phi = pi/2 within the search horizon")

    step = period / samples
    table_phi = np.empty(samples)
    table_p = np.empty(samples)
    phi, p = 0.5 * np.pi, p0
    for j in range(samples):
        table_phi[j] = phi
        table_p[j] = p
        phi, p = _yoshida_step(phi, p, step, c)
    drift = float(np.max(np.abs(_energy(table_phi, table_p, c) - E)))
    closure = float(np.hypot(phi - 0.5 * np.pi, p - p0))
    return MeanFieldOrbit(table_phi, table_p, float(period), E, drift, closure, c)


def _hermite_root(f0: float, d0: float, f1: float, d1: float, h: float) -> float:
    """Root in [0, h] of the cubic Hermite interpolant of (f, f') at both ends."""
    s0, s1 = 0.0, 1.0
    for _ in range(60):
        s = 0.5 * (s0 + s1)
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        val = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
        if val < 0.0:
            s0 = s
        else:
            s1 = s
    return 0.5 * (s0 + s1) * h


# ---------------------------------------------------------------- period constants


@dataclass(frozen=True)
class PeriodAverages:
    Lambda: float
    M_second_derivative: float
    M_by_parts: float
    M_energy: float

    @property
    def M(self) -> float:
        return self.M_by_parts


def _spectral_periodic_derivative(f: NDArray, period: float, order: int) -> NDArray:
    n = f.size
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=period / n)
    spec = (1j * k) ** order * np.fft.rfft(f)
    if n % 2 == 0 and order % 2 == 1:
        spec[-1] = 0.0
    return np.fft.irfft(spec, n=n)


def period_averages(orbit: MeanFieldOrbit) -> PeriodAverages:
    """Lambda = <b'^2/(a^2-b^2)> and M in its three equivalent forms.

    M_second_derivative: -1/2 <(q/b^{1/2}) (1/(q b^{1/2}))_TT>, spectral in T
    M_by_parts:           1/2 <(1/b)(b_T^2/(4 b^2) - q_T^2/q^2)>
    M_energy:             <((E-b)/b)(b'^2/(4 b^2) - q'^2/q^2)>
    """
    c = orbit.constants
    phi, p = orbit.phi, orbit.phi_T
    if orbit.fixed_point:
        return PeriodAverages(0.0, 0.0, 0.0, 0.0)
    b = _b(phi, c)
    bp = _b_prime(phi, c)
    q = np.abs(np.sin(phi))
    qp = np.sign(np.sin(phi)) * np.cos(phi)
    lam = float(np.mean(bp * bp / _a2_minus_b2(phi, c)))
    g = 1.0 / (q * np.sqrt(b))
    g_TT = _spectral_periodic_derivative(g, orbit.period, 2)
    m1 = float(-0.5 * np.mean((q / np.sqrt(b)) * g_TT))
    b_T = bp * p
    q_T = qp * p
    m2 = float(0.5 * np.mean((b_T**2 / (4.0 * b * b) - q_T**2 / (q * q)) / b))
    m3 = float(np.mean((orbit.E - b) / b * (bp * bp / (4.0 * b * b) - qp * qp / (q * q))))
    return PeriodAverages(lam, m1, m2, m3)


def period_constants(orbit: MeanFieldOrbit, c: ElasticConstants | None = None) -> tuple[float, float, float]:
    """(Lambda, M, mu = M / Lambda)."""
    if c is not None and c != orbit.constants:
        orbit = replace(orbit, constants=c)
    avg = period_averages(orbit)
    if abs(avg.Lambda) < 1e-14:
        raise ZeroLambda("Lambda vanishes (b' = 0 along the orbit); mu = M / Lambda is undefined")
    return avg.Lambda, avg.M, avg.M / avg.Lambda


# ---------------------------------------------------------------- periodic (u, v) solver


def _wavenumbers(n: int) -> NDArray:
    return np.fft.rfftfreq(n, d=1.0 / n)


def periodic_dx(f: NDArray, order: int = 1) -> NDArray:
    """Spectral derivative on [0, 2 pi)."""
    n = f.size
    k = _wavenumbers(n)
    spec = (1j * k) ** order * np.fft.rfft(f)
    if n % 2 == 0 and order % 2 == 1:
        spec[-1] = 0.0
    return np.fft.irfft(spec, n=n)


def inverse_laplacian(f: NDArray) -> NDArray:
    """Zero-mean solution of u_xx = f - <f>."""
    n = f.size
    k = _wavenumbers(n)
    spec = np.fft.rfft(f)
    out = np.zeros_like(spec)
    out[1:] = -spec[1:] / (k[1:] ** 2)
    return np.fft.irfft(out, n=n)


def u_from_v(v: NDArray) -> NDArray:
    w = periodic_dx(v)
    return inverse_laplacian(w * w)


@dataclass(frozen=True)
class PeriodicUVState:
    v: NDArray
    u: NDArray
    Q: float
    mu: float
    time: float = 0.0

    @property
    def n(self) -> int:
        return self.v.size

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.v.size

    @property
    def x(self) -> NDArray:
        return np.arange(self.v.size) * self.h

    def mean_energy(self) -> float:
        return float(np.mean(periodic_dx(self.v) ** 2))


def periodic_state(v: NDArray, mu: float) -> PeriodicUVState:
    v = np.asarray(v, dtype=float) - np.mean(v)
    w = periodic_dx(v)
    return PeriodicUVState(v, inverse_laplacian(w * w), float(np.mean(w * w)), float(mu))


def _klein_gordon(v: NDArray, coeff: float, dt: float) -> NDArray:
    """Exact flow of v_xt = -coeff v: each mode rotates by exp(i coeff dt / k)."""
    n = v.size
    k = _wavenumbers(n)
    spec = np.fft.rfft(v)
    spec[0] = 0.0
    spec[1:] *= np.exp(1j * coeff * dt / k[1:])
    if n % 2 == 0:
        # the Nyquist mode has no imaginary part to rotate into
        spec[-1] = spec[-1].real * np.cos(coeff * dt / k[-1])
    return np.fft.irfft(spec, n=n)


def _advection_rhs(v: NDArray) -> NDArray:
    w = periodic_dx(v)
    u = inverse_laplacian(w * w)
    rate = -u * w
    return rate - np.mean(rate)


def _advect(v: NDArray, dt: float) -> NDArray:
    k1 = _advection_rhs(v)
    k2 = _advection_rhs(v + 0.5 * dt * k1)
    k3 = _advection_rhs(v + 0.5 * dt * k2)
    k4 = _advection_rhs(v + dt * k3)
    return v + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def periodic_cfl(state: PeriodicUVState) -> float:
    umax = float(np.max(np.abs(state.u)))
    return np.inf if umax == 0.0 else CFL_MAX * state.h / umax


def periodic_step(state: PeriodicUVState, dt: float) -> PeriodicUVState:
    """Strang step: half Klein-Gordon rotation, RK4 advection, half rotation."""
    if dt > periodic_cfl(state) * (1.0 + 1e-12):
        raise CflViolation(f"dt={dt:.3e} exceeds {CFL_MAX} h / max|u| = {periodic_cfl(state):.3e}")
    coeff = state.mu * state.Q
    v = _klein_gordon(state.v, coeff, 0.5 * dt)
    v = _advect(v, dt)
    v = _klein_gordon(v, coeff, 0.5 * dt)
    v = v - np.mean(v)
    return replace(state, v=v, u=u_from_v(v), time=state.time + dt)


def periodic_evolve(state: PeriodicUVState, t_end: float, dt: float, callback=None) -> PeriodicUVState:
    steps = max(1, int(np.ceil((t_end - state.time) / dt - 1e-9)))
    dt = (t_end - state.time) / steps
    for _ in range(steps):
        state = periodic_step(state, dt)
        if callback is not None:
            callback(state)
    return state


def mode_phase(v: NDArray, k: int) -> float:
    """Phase of the sin-normalized Fourier mode k (v = A sin(k x + phase))."""
    coeff = np.fft.rfft(v)[k]
    return float(np.angle(coeff * 1j))


# ---------------------------------------------------------------- diagnostics


def mean_field_combination(u_prev: NDArray, u: NDArray, u_next: NDArray, v: NDArray, Q: float, mu: float, dt: float, sign: float = 1.0) -> NDArray:
    """d/dx [(u_t + u u_x)_x - u_x^2/2 + sign * Q (2u + mu v^2)] with centered u_t.

    sign = +1 is the combination that vanishes on solutions.
    """
    u_t = (u_next - u_prev) / (2.0 * dt)
    u_x = periodic_dx(u)
    inner = periodic_dx(u_t + u * u_x) - 0.5 * u_x * u_x + sign * Q * (2.0 * u + mu * v * v)
    return periodic_dx(inner)


def energy_flux(u: NDArray, v: NDArray, Q: float, Lambda: float = 1.0, M: float | None = None, mu: float = 0.0) -> NDArray:
    """Flux of v_x^2: Lambda (u v_x^2 + u_x^2/2 + Q u) + M Q v^2 (M defaults to mu Lambda)."""
    if M is None:
        M = mu * Lambda
    w = periodic_dx(v)
    u_x = periodic_dx(u)
    return Lambda * (u * w * w + 0.5 * u_x * u_x + Q * u) + M * Q * v * v


@dataclass(frozen=True)
class ProbeReport:
    combination_residual: float
    opposite_sign_residual: float
    flux_residual: float
    energy_drift: float
    mean_v: float
    mean_u: float
    time: float

    def as_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in self.__dataclass_fields__}


def nonintegrability_probe(
    state: PeriodicUVState,
    dt: float,
    horizon: float,
    corrupt: float = 0.0,
) -> ProbeReport:
    """Run to `horizon`, then evaluate the mean-field combination and flux law.

    The combination uses u_t from slices at horizon - dt, horizon, horizon + dt.
    `corrupt` adds corrupt * sin(3x) to the middle u slice (a sensitivity check).
    """
    if horizon < dt:
        raise ValueError("horizon must be at least one step")
    Q0 = state.Q
    state = periodic_evolve(state, horizon - dt, dt) if horizon - dt > state.time else state
    s_prev = state
    s_mid = periodic_step(s_prev, dt)
    s_next = periodic_step(s_mid, dt)
    u_mid = s_mid.u + corrupt * np.sin(3.0 * s_mid.x)
    Q = s_mid.mean_energy()
    comb = mean_field_combination(s_prev.u, u_mid, s_next.u, s_mid.v, Q, s_mid.mu, dt, 1.0)
    opp = mean_field_combination(s_prev.u, u_mid, s_next.u, s_mid.v, Q, s_mid.mu, dt, -1.0)
    m_prev = periodic_dx(s_prev.v) ** 2
    m_next = periodic_dx(s_next.v) ** 2
    flux = energy_flux(u_mid, s_mid.v, Q, mu=s_mid.mu)
    flux_res = (m_next - m_prev) / (2.0 * dt) + periodic_dx(flux)
    return ProbeReport(
        float(np.max(np.abs(comb))),
        float(np.max(np.abs(opp))),
        float(np.max(np.abs(flux_res))),
        abs(Q - Q0) / Q0,
        float(np.mean(s_mid.v)),
        float(np.mean(s_mid.u)),
        s_mid.time,
    )
