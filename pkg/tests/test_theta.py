import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heptamap import theta as th
from heptamap.exceptions import InputError, MatrixDomainError

import oracles


@st.composite
def cone_matrices(draw, lo=0.5, hi=3.0):
    d1 = draw(st.floats(lo, hi))
    d2 = draw(st.floats(lo, hi))
    frac = draw(st.floats(0.05, 0.95))
    off = frac * min(d1, d2)
    return np.array([[d1, off], [off, d2]])


@st.composite
def arguments(draw, scale=1.0):
    parts = [draw(st.floats(-scale, scale)) for _ in range(4)]
    return np.array([parts[0] + 1j * parts[1], parts[2] + 1j * parts[3]])


labels = st.tuples(st.integers(0, 1), st.integers(0, 1))


def test_identity_matrix_value_matches_one_dimensional_series():
    ref = oracles.one_dim_theta_at_zero(20) ** 2
    assert abs(th.theta(np.zeros(2), np.eye(2)) - ref) < 1e-14
    assert abs(ref - 1.1803406) < 1e-7


def test_integer_shift_is_a_period():
    om = np.array([[1.2, 0.3], [0.3, 0.9]])
    u = np.array([0.1 + 0.2j, -0.3 + 0.1j])
    base = th.theta(u, om)
    for m in ([1, 0], [0, 1], [-2, 3]):
        assert abs(th.theta(u + np.array(m), om) - base) < 1e-13 * abs(base)


def test_first_lattice_column_shift_factor():
    om = np.array([[1.4, 0.5], [0.5, 1.1]])
    u = np.array([0.2 - 0.1j, 0.35 + 0.2j])
    shifted = th.theta(u + 1j * om[:, 0], om)
    expected = np.exp(np.pi * om[0, 0] - 2j * np.pi * u[0]) * th.theta(u, om)
    assert abs(shifted - expected) < 1e-12 * abs(expected)


@given(cone_matrices(), arguments(), st.integers(-2, 2), st.integers(-2, 2), st.integers(-2, 2),
       st.integers(-2, 2), labels, labels)
def test_quasi_periodicity_property(om, u, m1, m2, n1, n2, eps, eps_p):
    ch = th.Characteristic(eps, eps_p)
    m, mp = np.array([m1, m2]), np.array([n1, n2])
    lhs = th.theta_char(ch, u + 1j * om @ m + mp, om)
    rhs = th.lattice_shift_factor(ch, u, om, m, mp) * th.theta_char(ch, u, om)
    assert abs(lhs - rhs) <= 1e-12 * max(abs(rhs), abs(lhs), 1e-300)


@given(cone_matrices(), arguments(0.7), labels, labels)
def test_series_matches_uncentred_brute_force(om, u, eps, eps_p):
    ref = oracles.theta_brute(eps, eps_p, u, om)
    val = th.theta_char(th.Characteristic(eps, eps_p), u, om)
    assert abs(val - ref) <= 1e-12 * max(abs(ref), 1.0)


@given(cone_matrices())
def test_odd_theta_constants_vanish(om):
    scale = abs(th.theta(np.zeros(2), om))
    for ch in th.odd_characteristics():
        assert ch.is_odd
        assert abs(th.theta_char(ch, np.zeros(2), om)) < 1e-13 * scale


def test_zero_characteristic_is_plain_theta():
    om = np.array([[1.0, 0.2], [0.2, 1.5]])
    u = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    assert th.theta_char(th.ZERO_CHAR, u, om) == th.theta(u, om)


def test_characteristic_as_shifted_plain_theta_at_half_period():
    om = np.array([[2.0, 0.5], [0.5, 2.0]])
    u = th.half_period(2, om)
    ch = th.CHAR_35
    e = np.array(ch.eps) / 2
    ep = np.array(ch.eps_prime) / 2
    lhs = th.theta_char(ch, u, om)
    rhs = th.char_prefactor(ch, u, om) * th.theta(u + 1j * om @ e + ep, om)
    assert abs(lhs - rhs) < 1e-13 * max(abs(rhs), 1.0)


def test_gradient_matches_central_differences(rng):
    for _ in range(20):
        om = np.array([[rng.uniform(0.8, 2.5), 0.0], [0.0, rng.uniform(0.8, 2.5)]])
        om[0, 1] = om[1, 0] = rng.uniform(0.1, 0.7) * min(om[0, 0], om[1, 1])
        u = rng.uniform(-0.5, 0.5, 2) + 1j * rng.uniform(-0.5, 0.5, 2)
        g = th.grad_theta_char(th.CHAR_35, u, om)
        h = 1e-5
        fd = np.array([(th.theta_char(th.CHAR_35, u + h * e, om) - th.theta_char(th.CHAR_35, u - h * e, om))
                       / (2 * h) for e in np.eye(2)])
        assert np.abs(fd - g).max() < 1e-8 * max(np.abs(g).max(), 1.0)


def test_hessian_matches_differences_of_gradient():
    om = np.array([[1.3, 0.4], [0.4, 1.1]])
    u = np.array([0.21 + 0.13j, -0.17 + 0.05j])
    H = th.hessian_theta_char(th.CHAR_35, u, om)
    h = 1e-6
    fd = np.column_stack([(th.grad_theta_char(th.CHAR_35, u + h * e, om)
                           - th.grad_theta_char(th.CHAR_35, u - h * e, om)) / (2 * h) for e in np.eye(2)])
    assert np.abs(fd - H).max() < 1e-7 * np.abs(H).max()
    assert np.abs(H - H.T).max() < 1e-12 * np.abs(H).max()


def test_even_gradient_vanishes_at_origin_and_odd_does_not():
    om = np.array([[1.3, 0.4], [0.4, 1.1]])
    assert np.abs(th.grad_theta_char(th.ZERO_CHAR, np.zeros(2), om)).max() < 1e-13
    assert np.abs(th.grad_theta_char(th.CHAR_35, np.zeros(2), om)).max() > 1e-2


def test_branch_subset_characteristics():
    c = th.char_of_branch_subset((3, 5))
    assert c.eps == (1, 1) and c.eps_prime == (0, 1)
    assert c.display() == "[10|11]"
    assert th.char_of_branch_subset(()) == th.ZERO_CHAR
    assert th.char_of_branch_subset((2, 2)) == th.ZERO_CHAR
    with pytest.raises(InputError):
        th.char_of_branch_subset((7,))


def test_half_period_table():
    om = np.diag([1.0, 2.0])
    assert np.allclose(th.half_period(4, om), [0.5, 1j])
    assert np.allclose(th.half_period(1, om), [0, 0])
    with pytest.raises(InputError):
        th.half_period(0, om)


@given(cone_matrices())
def test_theta35_vanishes_at_third_and_fifth_half_periods(om):
    for s in (3, 5):
        for hp in (th.half_period(s, om), th.block_half_period(s, om)):
            assert abs(th.theta_char(th.CHAR_35, hp, om)) < 1e-13 * abs(th.theta(np.zeros(2), om))


def test_truncation_radius_values():
    assert th.truncation_radius(np.eye(2), 1e-14) == 5
    assert th.truncation_radius(np.diag([0.05, 1.0]), 1e-14) >= 15
    om = np.array([[0.7, 0.2], [0.2, 0.9]])
    r = [th.truncation_radius(s * om, 1e-14) for s in (1, 4, 16)]
    assert r[0] >= r[1] >= r[2]


def test_truncation_radius_rejects_bad_tolerance():
    with pytest.raises(InputError):
        th.truncation_radius(np.eye(2), 0.5)


def test_riemann_matrix_checks():
    with pytest.raises(MatrixDomainError):
        th.check_riemann_matrix([[1, 2], [2, 1]])
    with pytest.raises(MatrixDomainError):
        th.check_riemann_matrix([[1, 0.1], [0.2, 1]])
    assert th.in_cone([[1, 0.3], [0.3, 2]]) and not th.in_cone([[1, -0.1], [-0.1, 2]])


def test_default_tolerance_override_changes_radius():
    om = np.eye(2)
    try:
        th.set_default_tolerance(1e-3)
        loose = th.truncation_radius(om)
    finally:
        th.set_default_tolerance(th.DEFAULT_TOL)
    assert loose < th.truncation_radius(om)
    with pytest.raises(InputError):
        th.set_default_tolerance(0.5)


@given(cone_matrices(), arguments(3.0))
def test_lattice_reduce_roundtrip(om, u):
    v, m, mp = th.lattice_reduce(u, om)
    assert np.allclose(v + 1j * om @ m + mp, u, atol=1e-12)
    eps, eps_p = th.block_coordinates(v, om)
    assert np.all(np.abs(eps / 2) <= 0.5 + 1e-12) and np.all(np.abs(eps_p / 2) <= 0.5 + 1e-12)
