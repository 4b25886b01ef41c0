import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orientwave.coeffs import (
    ElasticConstants,
    SolveStatus,
    apply_linear_map,
    constrained_residual,
    constrained_solve,
    directional_speed_derivative,
    dispersion,
    genuine_nonlinearity_gamma,
    lambda_coefficient,
    one_d_speeds,
    polarized_constants,
    twist_degeneracy_check,
)
from orientwave.errors import DegenerateDirection, NonStrict, ZeroWavenumber
from orientwave.scenarios import brute_force_branches

const = st.floats(0.2, 5.0)
comp = st.floats(-3.0, 3.0)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


@st.composite
def frames(draw):
    c = ElasticConstants(draw(const), draw(const), draw(const))
    k = np.array([draw(comp) for _ in range(3)])
    n = np.array([draw(comp) for _ in range(3)])
    if np.linalg.norm(k) < 0.1 or np.linalg.norm(n) < 0.1:
        k, n = np.array([1.0, 0.2, 0.3]), np.array([0.1, 0.4, 1.0])
    n = unit(n)
    if np.linalg.norm(np.cross(k, n)) < 1e-3 * np.linalg.norm(k):
        k = k + np.cross(n, [1.0, 2.0, 3.0])
    return c, k, n


def test_elastic_constants_reject_nonpositive():
    with pytest.raises(ValueError):
        ElasticConstants(1.0, 0.0, 1.0)
    assert ElasticConstants(1.0, 2.0, 3.0).strict
    assert not ElasticConstants(2.0, 2.0, 3.0).strict


def test_speeds_at_zero_angle():
    sp = one_d_speeds(0.0, ElasticConstants(1.3, 2.1, 3.7))
    assert sp.a == pytest.approx(math.sqrt(3.7))
    assert sp.b == pytest.approx(math.sqrt(3.7))
    assert sp.q == 0.0


def test_speeds_at_right_angle():
    sp = one_d_speeds(math.pi / 2, ElasticConstants(1.3, 2.1, 3.7))
    assert sp.a == pytest.approx(math.sqrt(1.3), abs=1e-12)
    assert sp.b == pytest.approx(math.sqrt(2.1), abs=1e-12)
    assert sp.q == pytest.approx(1.0, abs=1e-12)


def test_one_constant_speeds():
    sp = one_d_speeds(0.7, ElasticConstants(2.0, 2.0, 2.0))
    assert sp.a == pytest.approx(math.sqrt(2.0))
    assert sp.b == pytest.approx(math.sqrt(2.0))
    assert sp.a_prime == pytest.approx(0.0, abs=1e-14)


@given(st.floats(0.1, 3.0), const, const, const)
def test_speed_derivatives_match_central_differences(phi, a, b, g):
    c = ElasticConstants(a, b, g)
    h = 1e-6
    sp, hi, lo = one_d_speeds(phi, c), one_d_speeds(phi + h, c), one_d_speeds(phi - h, c)
    for name in ("a", "b", "q"):
        fd = (getattr(hi, name) - getattr(lo, name)) / (2 * h)
        assert getattr(sp, name + "_prime") == pytest.approx(fd, abs=1e-6)
    assert sp.a**2 == pytest.approx(a * math.sin(phi) ** 2 + g * math.cos(phi) ** 2, rel=1e-12)


def test_transverse_wavenumber_gives_bare_constants():
    c = ElasticConstants(1.5, 2.5, 4.0)
    fr = dispersion([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], c)
    assert fr.omega_splay**2 == pytest.approx(1.5)
    assert fr.omega_twist**2 == pytest.approx(2.5)


def test_parallel_wavenumber_is_degenerate():
    c = ElasticConstants(1.5, 2.5, 4.0)
    fr = dispersion([0.0, 0.0, 2.0], [0.0, 0.0, 1.0], c)
    assert fr.degenerate
    assert fr.omega_splay**2 == pytest.approx(16.0)
    assert fr.omega_twist == fr.omega_splay
    assert not np.any(fr.R) and not np.any(fr.S)


def test_zero_wavenumber():
    with pytest.raises(ZeroWavenumber):
        dispersion([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], ElasticConstants(1, 2, 3))


@given(frames())
def test_frame_orthogonality(f):
    c, k, n = f
    fr = dispersion(k, n, c)
    assert abs(fr.R @ n) < 1e-12 * (1 + k @ k)
    assert abs(fr.S @ n) < 1e-12 * (1 + k @ k)
    assert abs(fr.S @ k) < 1e-12 * (1 + k @ k)
    assert fr.R @ fr.R == pytest.approx(fr.transverse_sq, rel=1e-12, abs=1e-14)
    assert fr.S @ fr.S == pytest.approx(fr.transverse_sq, rel=1e-12, abs=1e-14)


@given(frames())
def test_cones_are_nested(f):
    c, k, n = f
    fr = dispersion(k, n, c)
    if c.beta <= c.alpha:
        assert fr.omega_twist <= fr.omega_splay + 1e-12
    else:
        assert fr.omega_twist >= fr.omega_splay - 1e-12


@settings(max_examples=200)
@given(frames())
def test_branches_match_determinant_roots(f):
    c, k, n = f
    fr = dispersion(k, n, c)
    roots = brute_force_branches(k, n, c)
    expect = np.sort([fr.omega_splay**2, fr.omega_twist**2])
    assert roots.size == 2
    gap = abs(expect[1] - expect[0]) / expect[1]
    # a nearly double root is only determined to about sqrt(eps)
    rtol = 1e-9 if gap > 1e-4 else 1e-6
    assert np.allclose(roots, expect, rtol=rtol, atol=0)


def test_eigenvectors_are_resonant():
    c = ElasticConstants(1.0, 2.0, 3.0)
    k, n = np.array([0.3, -1.1, 0.8]), unit([0.2, 0.5, 1.0])
    fr = dispersion(k, n, c)
    for vec, w in ((fr.R, fr.omega_splay), (fr.S, fr.omega_twist)):
        r = apply_linear_map(vec, k, n, w, c)
        assert np.linalg.norm(r - (r @ n) * n) < 1e-12


def test_gamma_vanishes_for_transverse_k():
    c = ElasticConstants(1.0, 2.0, 3.0)
    fr = dispersion([1.0, 1.0, 0.0], [0.0, 0.0, 1.0], c)
    assert genuine_nonlinearity_gamma(fr, c) == 0.0


def test_gamma_vanishes_when_splay_equals_bend():
    c = ElasticConstants(3.0, 2.0, 3.0)
    fr = dispersion([1.0, 0.4, 0.7], unit([0.3, 0.1, 1.0]), c)
    assert genuine_nonlinearity_gamma(fr, c) == 0.0


@given(frames())
def test_gamma_matches_finite_difference(f):
    c, k, n = f
    fr = dispersion(k, n, c)
    g = genuine_nonlinearity_gamma(fr, c)
    fd = directional_speed_derivative(fr, c, "splay", h=1e-5)
    assert abs(fd - g) < 1e-6 * max(1.0, abs(g))


@given(frames())
def test_twist_speed_is_linearly_degenerate(f):
    c, k, n = f
    assert abs(twist_degeneracy_check(dispersion(k, n, c), c)) < 1e-6


def test_twist_degeneracy_zero_for_transverse_k():
    c = ElasticConstants(1.0, 2.0, 3.0)
    fr = dispersion([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], c)
    assert twist_degeneracy_check(fr, c) == pytest.approx(0.0, abs=1e-12)


def test_degenerate_direction_errors():
    c = ElasticConstants(1.0, 2.0, 3.0)
    fr = dispersion([0.0, 0.0, 1.0], [0.0, 0.0, 1.0], c)
    for fn in (genuine_nonlinearity_gamma, twist_degeneracy_check, lambda_coefficient):
        with pytest.raises(DegenerateDirection):
            fn(fr, c)


def test_lambda_zero_cases():
    c = ElasticConstants(1.0, 2.0, 3.0)
    assert lambda_coefficient(dispersion([1.0, 1.0, 0.0], [0.0, 0.0, 1.0], c), c) == 0.0
    c2 = ElasticConstants(1.0, 3.0, 3.0)
    assert lambda_coefficient(dispersion([1.0, 0.5, 0.7], unit([0.1, 0.2, 1.0]), c2), c2) == 0.0
    with pytest.raises(NonStrict):
        c3 = ElasticConstants(2.0, 2.0, 3.0)
        lambda_coefficient(dispersion([1.0, 0.0, 1.0], [0.0, 0.0, 1.0], c3), c3)


def test_lambda_matches_one_dimensional_reduction():
    # k at angle phi = pi/4 to n0; the 1-D coefficient q^2 b b'/(a^2-b^2) times b'
    c = ElasticConstants(1.0, 2.0, 3.0)
    fr = dispersion(np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0), [1.0, 0.0, 0.0], c)
    sp = one_d_speeds(math.pi / 4, c)
    one_d = sp.q**2 * sp.b * sp.b_prime / (sp.a**2 - sp.b**2)
    assert lambda_coefficient(fr, c) == pytest.approx(sp.b_prime * one_d, rel=1e-12)


def test_polarized_constants():
    assert polarized_constants(ElasticConstants(1.0, 2.0, 4.0)) == pytest.approx((-0.75, -0.5))
    assert polarized_constants(ElasticConstants(3.0, 1.0, 3.0))[0] == 0.0
    assert polarized_constants(ElasticConstants(1.0, 3.0, 3.0))[1] == 0.0
    assert polarized_constants(ElasticConstants(2.0, 2.0, 2.0)) == (0.0, 0.0)


def dense_solve(k, n, w, c, F, G):
    """Independent oracle: the bordered 4x4 system assembled from the vector form."""
    L = np.column_stack([apply_linear_map(e, k, n, w, c) for e in np.eye(3)])
    A = np.zeros((4, 4))
    A[:3, :3] = L
    A[:3, 3] = -n
    A[3, :3] = n
    sol = np.linalg.solve(A, np.concatenate([F, [G]]))
    return sol[:3], sol[3]


@given(frames(), st.floats(0.0, 4.0), st.lists(comp, min_size=4, max_size=4))
def test_unique_solve_matches_dense_oracle(f, w, fg):
    c, k, n = f
    fr = dispersion(k, n, c)
    for branch in (fr.omega_splay, fr.omega_twist):
        if abs(w**2 - branch**2) < 1e-3 * branch**2:
            w = w + 0.1 * branch + 0.05
    F, G = np.array(fg[:3]), fg[3]
    res = constrained_solve(k, n, w, c, F, G)
    assert res.status is SolveStatus.UNIQUE
    m, lam = dense_solve(k, n, w, c, F, G)
    scale = 1 + np.linalg.norm(m) + abs(lam)
    assert np.linalg.norm(res.m - m) < 1e-8 * scale
    r_eq, r_con = constrained_residual(res, k, n, w, c, F, G)
    assert r_eq <= 1e-10 * (1 + np.linalg.norm(F)) * scale
    assert r_con <= 1e-10 * scale


def test_twist_resonance_unsolvable_for_S_forcing():
    c = ElasticConstants(1.0, 2.0, 3.0)
    k, n = np.array([1.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0])
    fr = dispersion(k, n, c)
    res = constrained_solve(k, n, fr.omega_twist, c, fr.S, 0.0)
    assert res.status is SolveStatus.RESONANT_UNSOLVABLE


def test_twist_resonance_homogeneous():
    c = ElasticConstants(1.0, 2.0, 3.0)
    k, n = np.array([1.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0])
    fr = dispersion(k, n, c)
    res = constrained_solve(k, n, fr.omega_twist, c, np.zeros(3), 0.0)
    assert res.status is SolveStatus.RESONANT_SOLVABLE
    assert res.lam == 0.0
    assert len(res.nullspace) == 1
    assert np.linalg.norm(np.cross(res.nullspace[0], fr.S)) < 1e-14
    # any multiple of S solves the homogeneous problem with lambda = 0
    r = apply_linear_map(3.7 * fr.S, k, n, fr.omega_twist, c)
    assert np.linalg.norm(r) < 1e-12


def test_splay_resonance_solvability_condition():
    c = ElasticConstants(1.0, 2.0, 3.0)
    k, n = np.array([1.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0])
    fr = dispersion(k, n, c)
    G = 0.4
    kn, kR = fr.k_dot_n, float(k @ fr.R)
    # R.F + (alpha - gamma)(k.n0)(k.R) G = 0
    F = -(c.alpha - c.gamma) * kn * kR * G * fr.R / (fr.R @ fr.R) + 0.2 * fr.S
    res = constrained_solve(k, n, fr.omega_splay, c, F, G)
    assert res.status is SolveStatus.RESONANT_SOLVABLE
    r_eq, r_con = constrained_residual(res, k, n, fr.omega_splay, c, F, G)
    assert r_eq < 1e-10 and r_con < 1e-10
    bad = constrained_solve(k, n, fr.omega_splay, c, F + 0.1 * fr.R, G)
    assert bad.status is SolveStatus.RESONANT_UNSOLVABLE


def test_bend_resonance_needs_parallel_forcing():
    c = ElasticConstants(1.0, 2.0, 3.0)
    k, n = np.array([0.0, 0.0, 2.0]), np.array([0.0, 0.0, 1.0])
    w = math.sqrt(c.gamma * 4.0)
    ok = constrained_solve(k, n, w, c, np.array([0.0, 0.0, 1.0]), 0.3)
    assert ok.status is SolveStatus.RESONANT_SOLVABLE
    assert len(ok.nullspace) == 2
    assert all(abs(v @ n) < 1e-14 for v in ok.nullspace)
    bad = constrained_solve(k, n, w, c, np.array([1.0, 0.0, 0.0]), 0.3)
    assert bad.status is SolveStatus.RESONANT_UNSOLVABLE
