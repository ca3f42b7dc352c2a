import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heptamap import theta as th
from heptamap.curve import (CurvePoint, abel_jacobi, cs_quadrature, cs_side_lengths, cs_vertices,
                            initial_curve_guess, marked_point_image, period_basis)
from heptamap.exceptions import DegenerateCurveError, PathError

import oracles

# period matrix of the symmetric start curve, frozen from the quad-based oracle
START_OMEGA = np.array([[0.907205984954645, 0.216030571897278],
                        [0.216030571897278, 0.907205984954645]])


@st.composite
def sextics(draw):
    gaps = [draw(st.floats(0.25, 2.0)) for _ in range(5)]
    x0 = draw(st.floats(-4.0, 1.0))
    return x0 + np.concatenate([[0.0], np.cumsum(gaps)])


@settings(max_examples=15)
@given(sextics())
def test_period_matrix_matches_oracle_and_lies_in_cone(xs):
    cur = period_basis(xs)
    _, Pi = oracles.period_data(xs)
    assert np.abs(cur.period_matrix - Pi).max() < 1e-9 * np.abs(Pi).max()
    assert np.abs(cur.period_matrix.real).max() < 1e-9 * np.abs(cur.omega).max()
    assert th.in_cone(cur.omega)


def test_symmetric_curve_has_equal_diagonal():
    cur = period_basis([-3, -2, -1, 1, 2, 3])
    assert abs(cur.omega[0, 0] - cur.omega[1, 1]) < 1e-9


def test_start_curve_regression():
    cur = initial_curve_guess((1, 2, 3), (-1, 1, -1, -1, -2))
    assert np.abs(cur.omega - START_OMEGA).max() < 1e-12
    assert th.in_cone(cur.omega)


def test_near_coincident_branch_points_rejected():
    with pytest.raises(DegenerateCurveError):
        period_basis([0, 1, 2, 3, 4, 4 + 1e-12])
    with pytest.raises(DegenerateCurveError):
        period_basis([0, 2, 1, 3, 4, 5])


def test_abel_jacobi_base_point_and_second_branch_point():
    xs = np.array([-3.0, -1.7, -1.0, 1.1, 2.0, 3.5])
    cur = period_basis(xs)
    assert np.abs(abel_jacobi(cur, CurvePoint(complex(xs[0]), 1))).max() < 1e-14
    u2 = abel_jacobi(cur, CurvePoint(complex(xs[1]), 1))
    diff, _, _ = th.lattice_reduce(u2 - 0.5j * cur.omega[:, 0], cur.omega)
    assert np.abs(diff).max() < 1e-8


def test_abel_jacobi_matches_oracle():
    xs = np.array([-3.0, -1.7, -1.0, 1.1, 2.0, 3.5])
    cur = period_basis(xs)
    M, _ = oracles.period_data(xs)
    for x in (0.4 + 0.8j, -2.2 + 0.3j, 3.9 + 1.5j):
        assert np.abs(abel_jacobi(cur, CurvePoint(x, 1)) - oracles.abel_jacobi_upper(xs, M, x)).max() < 1e-10


def test_abel_jacobi_is_path_independent_within_the_half_plane():
    xs = np.array([-3.0, -1.7, -1.0, 1.1, 2.0, 3.5])
    cur = period_basis(xs)
    x = 0.5 + 0.7j
    u1 = abel_jacobi(cur, CurvePoint(x, 1))
    u2 = abel_jacobi(cur, CurvePoint(x, 1), path=[xs[0], xs[0] + 0.3j, 0.5 + 0.2j, x])
    assert np.abs(u1 - u2).max() < 1e-11
    with pytest.raises(PathError):
        abel_jacobi(cur, CurvePoint(x, 1), path=[xs[1], x])


def test_sheet_change_negates_image():
    xs = np.array([-3.0, -1.7, -1.0, 1.1, 2.0, 3.5])
    cur = period_basis(xs)
    x = 0.3 + 0.9j
    up = abel_jacobi(cur, CurvePoint(x, 1))
    down = abel_jacobi(cur, CurvePoint(x, -1))
    diff, _, _ = th.lattice_reduce(up + down, cur.omega)
    assert np.abs(diff).max() < 1e-10


@settings(max_examples=5)
@given(sextics(), st.randoms(use_true_random=False))
def test_curve_points_lie_on_theta_divisor(xs, rnd):
    cur = period_basis(xs)
    for _ in range(10):
        x = complex(rnd.uniform(xs[0] - 2, xs[-1] + 2), rnd.uniform(-3, 3))
        u = abel_jacobi(cur, CurvePoint(x, rnd.choice([-1, 1])))
        assert abs(th.theta_char(th.CHAR_35, u, cur.omega)) < 1e-8


def test_marked_point_is_on_divisor_and_real():
    cur = period_basis([-3.0, -1.7, -1.0, 1.1, 2.0, 3.5])
    u0 = marked_point_image(cur)
    assert np.all(np.isreal(u0))
    assert abs(th.theta_char(th.CHAR_35, u0, cur.omega)) < 1e-10


def test_cs_quadrature_is_linear_in_scale():
    cur = period_basis([-3.0, -1.7, -1.0, 1.1, 2.0, 3.5])
    a = cs_quadrature(cur, (1, 2, 3), 1.0, cur.x[1], cur.x[2])
    b = cs_quadrature(cur, (1, 2, 3), 2.0, cur.x[1], cur.x[2])
    assert b == 2 * a


def test_cs_increments_are_axis_parallel_and_match_oracle():
    xs = np.array([-3.0, -1.7, -1.0, 1.1, 2.0, 3.5])
    cur = period_basis(xs)
    w = cs_vertices(cur, (1, 2, 3))
    roots = xs[[0, 1, 2]]
    for s in range(5):
        d = w[s + 1] - w[s]
        assert min(abs(d.real), abs(d.imag)) < 1e-9 * max(abs(d.real), abs(d.imag), 1e-300)
        assert abs(d - oracles.cs_increment(xs, roots, xs[s], xs[s + 1])) < 1e-9 * max(abs(d), 1.0)
    H = cs_side_lengths(cur, (1, 2, 3))
    assert np.allclose([(w[s + 1] - w[s]) / 1j ** (s + 1) for s in range(5)], H, atol=1e-12)
