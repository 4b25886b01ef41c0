import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orientwave import polarized as pz
from orientwave.coeffs import ElasticConstants, polarized_constants
from orientwave.errors import CflViolation, NotOrthogonal, RadialDegeneracy
from orientwave.grid import Grid, fitted_order

MU, NU = polarized_constants(ElasticConstants(4.5, 2.1, 3.0))


def test_constants_for_reference_material():
    assert (MU, NU) == pytest.approx((0.5, -0.3))


def test_plane_polarized_reduces_to_scalar():
    grid = Grid(-6.0, 6.0, 401)
    u1 = 0.8 * np.exp(-grid.x**2) + 0.2
    vs = pz.polarized_state(grid, np.stack([u1, np.zeros(grid.n)]), MU, NU)
    cs = pz.cubic_state(grid, u1, MU)
    dt = 0.5 * pz.vector_cfl(vs)
    for _ in range(20):
        vs, cs = pz.polarized_step_vector(vs, dt), pz.cubic_hs_step(cs, dt)
    assert np.max(np.abs(vs.w[0] - cs.w)) < 1e-12
    assert np.max(np.abs(vs.w[1])) == 0.0


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 2 * math.pi))
def test_rotation_invariance(angle):
    grid = Grid(-4.0, 4.0, 161)
    x = grid.x
    u = np.stack([0.5 + 0.4 * np.exp(-x * x), 0.3 * np.exp(-((x - 0.5) ** 2))])
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    a = pz.polarized_state(grid, u, MU, NU)
    b = pz.polarized_state(grid, R @ u, MU, NU)
    dt = 0.5 * pz.vector_cfl(a)
    for _ in range(5):
        a, b = pz.polarized_step_vector(a, dt), pz.polarized_step_vector(b, dt)
    assert np.max(np.abs(R @ a.u - b.u)) < 1e-12


def test_circular_wave_is_not_steady():
    for n, k in ((401, 1.0), (801, 1.0)):
        grid = Grid(0.0, 2 * math.pi, n)
        x = grid.x
        u = np.stack([np.cos(k * x), np.sin(k * x)])
        s = pz.polarized_state(grid, u, MU, NU)
        w_t = pz._vector_rhs(s.w, s.u_left, grid.h, MU, NU)
        # u_x . u = 0 and |u| = 1 leave u_xt = 2 nu k^2 u
        err = np.max(np.abs(w_t - 2 * NU * k * k * s.u)[:, 2:-2])
        assert err < 10 * grid.h**2
    s0 = pz.polarized_state(grid, u, MU, 0.0)
    assert np.max(np.abs(pz._vector_rhs(s0.w, s0.u_left, grid.h, MU, 0.0)[:, 2:-2])) < 1e-3


def test_scalar_cubic_residual_second_order():
    res = []
    for n in (201, 401, 801):
        grid = Grid(-6.0, 6.0, n)
        s = pz.cubic_state(grid, 0.8 * np.exp(-grid.x**2) + 0.2, MU)
        dt = 0.25 * pz.cubic_cfl(s)
        s0 = pz.cubic_hs_step(s, dt)
        s1 = pz.cubic_hs_step(s0, dt)
        s2 = pz.cubic_hs_step(s1, dt)
        res.append(np.max(np.abs(pz.cubic_residual(s0.u, s1.u, s2.u, grid.h, dt, MU)[4:-4])))
    assert fitted_order([201, 401, 801], res) >= 1.8


def test_energy_changes_by_boundary_power():
    grid = Grid(-6.0, 6.0, 401)
    x = grid.x
    s = pz.polarized_state(grid, np.stack([1.0 + 0.3 * np.exp(-x * x), 0.2 * np.exp(-((x - 0.5) ** 2))]), MU, NU)
    dt = 0.4 * pz.vector_cfl(s)
    E0 = pz.polarized_energy(s)
    p0, flowed = pz.boundary_power(s), 0.0
    for _ in range(100):
        s = pz.polarized_step_vector(s, dt)
        p1 = pz.boundary_power(s)
        flowed += 0.5 * dt * (p0 + p1)
        p0 = p1
    change = pz.polarized_energy(s) - E0
    assert abs(change) > 1e-4
    assert abs(change - flowed) < 0.01 * abs(change)


def test_polar_form_matches_cartesian():
    errs = []
    ns = (101, 201, 401)
    for n in ns:
        grid = Grid(-6.0, 6.0, n)
        x = grid.x
        ps = pz.polar_state(grid, 1.0 + 0.3 * np.exp(-x * x), 0.5 * np.exp(-((x - 0.5) ** 2)), MU, NU)
        cart = pz.polar_to_cartesian(ps)
        steps = n // 4
        dt = 0.25 / steps
        for _ in range(steps):
            ps, cart = pz.polarized_step_polar(ps, dt), pz.polarized_step_vector(cart, dt)
        errs.append(np.max(np.abs(ps.to_cartesian() - cart.u)))
    assert fitted_order(ns, errs) >= 1.8


def test_polar_form_rejects_origin():
    grid = Grid(-1.0, 1.0, 41)
    ps = pz.polar_state(grid, np.abs(grid.x), np.zeros(grid.n), MU, NU)
    with pytest.raises(RadialDegeneracy):
        pz.polarized_step_polar(ps, 1e-4)


def test_cfl_guards():
    grid = Grid(-1.0, 1.0, 41)
    s = pz.polarized_state(grid, np.stack([np.ones(grid.n), np.zeros(grid.n)]), MU, NU)
    with pytest.raises(CflViolation):
        pz.polarized_step_vector(s, 2 * pz.vector_cfl(s))
    c = pz.cubic_state(grid, np.ones(grid.n), MU)
    with pytest.raises(CflViolation):
        pz.cubic_hs_step(c, 2 * pz.cubic_cfl(c))


E1, E2, N0 = np.eye(3)[0], np.eye(3)[1], np.eye(3)[2]


def test_identity_on_trigonometric_field():
    t = np.linspace(0, 2 * math.pi, 50)[:, None]
    u = np.cos(t) * E1 + np.sin(t) * E2
    u1 = -np.sin(t) * E1 + np.cos(t) * E2
    assert pz.a4_identity_check(u, u1, -u, N0) < 1e-14


def test_identity_on_constant_field():
    u = np.tile(0.3 * E1 - 2.0 * E2, (5, 1))
    z = np.zeros_like(u)
    assert pz.a4_identity_check(u, z, z, N0) == 0.0


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=8, max_size=8),
    st.floats(0, math.pi),
    st.floats(0, 2 * math.pi),
)
def test_identity_on_random_polynomial_fields(coefs, pol, az):
    n0 = np.array([math.sin(pol) * math.cos(az), math.sin(pol) * math.sin(az), math.cos(pol)])
    e1 = np.cross(n0, np.eye(3)[int(np.argmin(np.abs(n0)))])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n0, e1)
    P = np.polynomial.polynomial
    th = np.linspace(-1, 1, 30)
    parts = []
    for order in range(3):
        a = P.polyval(th, P.polyder(coefs[:4], order))
        b = P.polyval(th, P.polyder(coefs[4:], order))
        parts.append(np.outer(a, e1) + np.outer(b, e2))
    scale = max(1.0, np.max(np.abs(parts[0]))) ** 2 * max(1.0, np.max(np.abs(parts[2])), np.max(np.abs(parts[1])))
    assert pz.a4_identity_check(*parts, n0) < 1e-12 * scale


def test_identity_rejects_bad_inputs():
    u = np.array([[1.0, 0.0, 0.0]])
    z = np.zeros_like(u)
    with pytest.raises(NotOrthogonal):
        pz.a4_identity_check(u, z, z, 2 * N0)
    with pytest.raises(NotOrthogonal):
        pz.a4_identity_check(u + 0.1 * N0, z, z, N0)


def test_angular_variation_forces_radial_motion():
    grid = Grid(0.0, 2.0, 201)
    r = np.ones(grid.n)
    P, R = pz.polar_time_derivatives(r, 1.5 * grid.x, grid.h, MU, NU)
    # r_x = 0 and v_x = k leave P_x = 2 nu k^2 r^3 + r k R, so r_t grows from rest at x_L
    assert P[0] == 0.0
    assert np.max(np.abs(P)) > 0.1
    P0, _ = pz.polar_time_derivatives(r, np.full(grid.n, 0.4), grid.h, MU, NU)
    assert np.max(np.abs(P0)) < 1e-15
