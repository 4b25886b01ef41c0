"""Elastic constants, linear wave speeds and the constrained linear solve.

The director perturbation m of a plane wave with wavenumber k on a uniform
director n0 obeys  L(omega) m - lambda n0 = F,  n0 . m = G,  where

    L m = omega^2 m - alpha (k.m) k + beta A (k x n0) + gamma k x (B x n0),
    A = n0 . (k x m),   B = n0 x (k x m).

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DegenerateDirection, NonStrict, ZeroWavenumber

RESONANCE_RTOL = 1e-9
PARALLEL_TOL = 1e-12
FD_STEP = 1e-5


@dataclass(frozen=True)
class ElasticConstants:
    """Splay (alpha), twist (beta) and bend (gamma) constants."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    @property
    def strict(self) -> bool:
        """True when splay and twist speeds differ away from k parallel to n0."""
        return self.alpha != self.beta

    @property
    def one_constant(self) -> bool:
        return self.alpha == self.beta == self.gamma


@dataclass(frozen=True)
class OneDSpeeds:
    phi: float
    a: float
    b: float
    q: float
    a_prime: float
    b_prime: float
    q_prime: float


def one_d_speeds(phi: float, c: ElasticConstants) -> OneDSpeeds:
    """Splay speed a, twist speed b and twist weight q at polar angle phi."""
    s, co = np.sin(phi), np.cos(phi)
    a = float(np.sqrt(c.alpha * s * s + c.gamma * co * co))
    b = float(np.sqrt(c.beta * s * s + c.gamma * co * co))
    a_prime = (c.alpha - c.gamma) * s * co / a
    b_prime = (c.beta - c.gamma) * s * co / b
    # q = |sin phi| so that q >= 0 for every angle
    sign = 1.0 if s >= 0.0 else -1.0
    return OneDSpeeds(
        phi=float(phi),
        a=a,
        b=b,
        q=float(abs(s)),
        a_prime=float(a_prime),
        b_prime=float(b_prime),
        q_prime=float(sign * co),
    )


def speed_arrays(phi: NDArray, c: ElasticConstants) -> tuple[NDArray, ...]:
    """Vectorised (a^2, a a', b^2, b b', q^2, q q') on an array of angles."""
    s, co = np.sin(phi), np.cos(phi)
    s2, c2, sc = s * s, co * co, s * co
    a2 = c.alpha * s2 + c.gamma * c2
    b2 = c.beta * s2 + c.gamma * c2
    return a2, (c.alpha - c.gamma) * sc, b2, (c.beta - c.gamma) * sc, s2, sc


def _as_vec(v: ArrayLike) -> NDArray:
    out = np.asarray(v, dtype=float).reshape(3)
    return out


def splay_speed_squared(k: ArrayLike, n0: ArrayLike, c: ElasticConstants) -> float:
    """alpha [k^2 - (k.n0)^2] + gamma (k.n0)^2; n0 is not renormalised."""
    k, n0 = _as_vec(k), _as_vec(n0)
    kn = float(k @ n0)
    return float(c.alpha * (k @ k - kn * kn) + c.gamma * kn * kn)


def twist_speed_squared(k: ArrayLike, n0: ArrayLike, c: ElasticConstants) -> float:
    k, n0 = _as_vec(k), _as_vec(n0)
    kn = float(k @ n0)
    return float(c.beta * (k @ k - kn * kn) + c.gamma * kn * kn)


@dataclass(frozen=True)
class WaveFrame:
    k: NDArray
    n0: NDArray
    omega_splay: float
    omega_twist: float
    R: NDArray
    S: NDArray
    degenerate: bool = False

    @property
    def k_dot_n(self) -> float:
        return float(self.k @ self.n0)

    @property
    def transverse_sq(self) -> float:
        """k^2 - (k.n0)^2, which equals |R|^2 = |S|^2."""
        kn = self.k_dot_n
        return float(self.k @ self.k - kn * kn)


def _is_parallel(k: NDArray, n0: NDArray) -> bool:
    return float(np.linalg.norm(np.cross(k, n0))) <= PARALLEL_TOL * float(np.linalg.norm(k))


def dispersion(k: ArrayLike, n0: ArrayLike, c: ElasticConstants) -> WaveFrame:
    """Both branch frequencies and the (unnormalised) eigenvectors R, S."""
    k, n0 = _as_vec(k), _as_vec(n0)
    if not np.any(k):
        raise ZeroWavenumber("wavenumber must be nonzero")
    if abs(float(np.linalg.norm(n0)) - 1.0) > 1e-12:
        raise ValueError("n0 must be a unit vector")
    degenerate = _is_parallel(k, n0)
    if degenerate:
        w2 = c.gamma * float(k @ n0) ** 2
        zero = np.zeros(3)
        return WaveFrame(k, n0, float(np.sqrt(w2)), float(np.sqrt(w2)), zero, zero.copy(), True)
    R = k - float(k @ n0) * n0
    S = np.cross(k, n0)
    return WaveFrame(
        k=k,
        n0=n0,
        omega_splay=float(np.sqrt(splay_speed_squared(k, n0, c))),
        omega_twist=float(np.sqrt(twist_speed_squared(k, n0, c))),
        R=R,
        S=S,
        degenerate=False,
    )


def apply_linear_map(m: ArrayLike, k: ArrayLike, n0: ArrayLike, omega: float, c: ElasticConstants) -> NDArray:
    """Evaluate L(omega) m directly from its vector form."""
    m, k, n0 = _as_vec(m), _as_vec(k), _as_vec(n0)
    km = np.cross(k, m)
    A = float(n0 @ km)
    B = np.cross(n0, km)
    return (
        omega**2 * m
        - c.alpha * float(k @ m) * k
        + c.beta * A * np.cross(k, n0)
        + c.gamma * np.cross(k, np.cross(B, n0))
    )


def genuine_nonlinearity_gamma(frame: WaveFrame, c: ElasticConstants) -> float:
    """Derivative of the splay speed along its own eigenvector R."""
    if frame.degenerate:
        raise DegenerateDirection("splay branch is degenerate for k parallel to n0")
    return -((c.alpha - c.gamma) / frame.omega_splay) * frame.k_dot_n * frame.transverse_sq


def directional_speed_derivative(
    frame: WaveFrame, c: ElasticConstants, branch: str, h: float = FD_STEP
) -> float:
    """Central difference of a branch speed as n0 moves along its eigenvector.

    The director is not renormalised, matching the convention under which
    the genuine-nonlinearity coefficient is derived.
    """
    if frame.degenerate:
        raise DegenerateDirection(f"{branch} branch is degenerate for k parallel to n0")
    if branch == "splay":
        speed2, direction = splay_speed_squared, frame.R
    elif branch == "twist":
        speed2, direction = twist_speed_squared, frame.S
    else:
        raise ValueError(f"unknown branch {branch!r}")
    plus = np.sqrt(speed2(frame.k, frame.n0 + h * direction, c))
    minus = np.sqrt(speed2(frame.k, frame.n0 - h * direction, c))
    return float((plus - minus) / (2.0 * h))


def twist_degeneracy_check(frame: WaveFrame, c: ElasticConstants, h: float = FD_STEP) -> float:
    """Finite-difference derivative of the twist speed along S (should vanish)."""
    return directional_speed_derivative(frame, c, "twist", h)


def lambda_coefficient(frame: WaveFrame, c: ElasticConstants) -> float:
    """Cubic-nonlinearity coefficient of the twist branch."""
    if not c.strict:
        raise NonStrict("the twist coefficient needs alpha != beta")
    if frame.degenerate:
        raise DegenerateDirection("twist branch is degenerate for k parallel to n0")
    kn = frame.k_dot_n
    return ((c.beta - c.gamma) ** 2 / (frame.omega_twist * (c.alpha - c.beta))) * kn * kn * frame.transverse_sq


def polarized_constants(c: ElasticConstants) -> tuple[float, float]:
    """Normalised radial and angular coefficients (mu, nu)."""
    return (c.alpha - c.gamma) / c.gamma, (c.beta - c.gamma) / c.gamma


class SolveStatus(enum.Enum):
    UNIQUE = "Unique"
    RESONANT_SOLVABLE = "ResonantSolvable"
    RESONANT_UNSOLVABLE = "ResonantUnsolvable"


@dataclass
class ConstrainedSolveResult:
    status: SolveStatus
    m: NDArray
    lam: float
    nullspace: list[NDArray] = field(default_factory=list)
    resonances: tuple[str, ...] = ()


def _resonant(omega2: float, branch2: float) -> bool:
    return abs(omega2 - branch2) <= RESONANCE_RTOL * abs(branch2)


def _perp_basis(n0: NDArray) -> tuple[NDArray, NDArray]:
    trial = np.eye(3)[int(np.argmin(np.abs(n0)))]
    e1 = trial - float(trial @ n0) * n0
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n0, e1)


def constrained_solve(
    k: ArrayLike,
    n0: ArrayLike,
    omega: float,
    c: ElasticConstants,
    F: ArrayLike,
    G: float,
) -> ConstrainedSolveResult:
    """Solve L(omega) m - lambda n0 = F, n0.m = G, classifying resonances.

    Away from k parallel to n0 the problem diagonalises in the orthogonal
    basis (n0, R, S):

        R part:   (omega^2 - a^2) m_R - (alpha-gamma)(k.n0) G = F_R
        n0 part:  lambda = (omega^2 - gamma k^2 - (alpha-gamma)(k.n0)^2) G
                           - (alpha-gamma)(k.n0)|R|^2 m_R - F_n
        S part:   (omega^2 - b^2) m_S = F_S

    On a resonant branch the particular solution takes a zero component
    along that branch and the branch eigenvector is reported as nullspace.
    """
    k, n0, F = _as_vec(k), _as_vec(n0), _as_vec(F)
    G = float(G)
    if not np.any(k):
        raise ZeroWavenumber("wavenumber must be nonzero")
    w2 = float(omega) ** 2
    k2 = float(k @ k)
    kn = float(k @ n0)
    dag = c.alpha - c.gamma
    scale = 1.0 + float(np.linalg.norm(F)) + abs(G) * max(c.alpha, c.beta, c.gamma) * k2

    if _is_parallel(k, n0):
        Fn = float(F @ n0)
        Fperp = F - Fn * n0
        if _resonant(w2, c.gamma * k2):
            e1, e2 = _perp_basis(n0)
            ok = float(np.linalg.norm(Fperp)) <= RESONANCE_RTOL * scale
            status = SolveStatus.RESONANT_SOLVABLE if ok else SolveStatus.RESONANT_UNSOLVABLE
            lam = -(Fn + dag * k2 * G)
            return ConstrainedSolveResult(status, G * n0, lam, [e1, e2], ("bend",))
        m = G * n0 + Fperp / (w2 - c.gamma * k2)
        lam = (w2 - c.alpha * k2) * G - Fn
        return ConstrainedSolveResult(SolveStatus.UNIQUE, m, lam)

    R = k - kn * n0
    S = np.cross(k, n0)
    r2 = float(R @ R)
    a2 = c.alpha * r2 + c.gamma * kn * kn
    b2 = c.beta * r2 + c.gamma * kn * kn
    F_n = float(F @ n0)
    F_R = float(F @ R) / r2
    F_S = float(F @ S) / r2

    status = SolveStatus.UNIQUE
    nullspace: list[NDArray] = []
    resonances: list[str] = []

    rhs_R = F_R + dag * kn * G
    if _resonant(w2, a2):
        resonances.append("splay")
        nullspace.append(R)
        # solvability: R.F + (alpha-gamma)(k.n0)(k.R) G = 0
        if abs(rhs_R) * np.sqrt(r2) > RESONANCE_RTOL * scale:
            status = SolveStatus.RESONANT_UNSOLVABLE
        m_R = 0.0
    else:
        m_R = rhs_R / (w2 - a2)

    if _resonant(w2, b2):
        resonances.append("twist")
        nullspace.append(S)
        if abs(F_S) * np.sqrt(r2) > RESONANCE_RTOL * scale:
            status = SolveStatus.RESONANT_UNSOLVABLE
        m_S = 0.0
    else:
        m_S = F_S / (w2 - b2)

    if resonances and status is SolveStatus.UNIQUE:
        status = SolveStatus.RESONANT_SOLVABLE

    lam = (w2 - c.gamma * k2 - dag * kn * kn) * G - dag * kn * r2 * m_R - F_n
    m = G * n0 + m_R * R + m_S * S
    return ConstrainedSolveResult(status, m, float(lam), nullspace, tuple(resonances))


def constrained_residual(
    result: ConstrainedSolveResult,
    k: ArrayLike,
    n0: ArrayLike,
    omega: float,
    c: ElasticConstants,
    F: ArrayLike,
    G: float,
) -> tuple[float, float]:
    """Return (|L m - lambda n0 - F|, |n0.m - G|) for a computed solution."""
    n0v = _as_vec(n0)
    r = apply_linear_map(result.m, k, n0v, omega, c) - result.lam * n0v - _as_vec(F)
    return float(np.linalg.norm(r)), abs(float(n0v @ result.m) - float(G))
