import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from heptamap import polygon as pg
from heptamap.exceptions import InputError, ValidationError
from heptamap.polygon import PolygonSpec

sigmas = st.sampled_from([(a, b, c) for a in range(1, 7) for b in range(a + 1, 7) for c in range(b + 1, 7)])


@st.composite
def valid_specs(draw):
    sigma = draw(sigmas)
    H = []
    for s in range(1, 6):
        mag = draw(st.floats(0.2, 3.0))
        H.append(mag * pg.expected_sign(sigma, s))
    spec = PolygonSpec(sigma, tuple(H))
    assume(pg.validate(spec) == [])
    return spec


@st.composite
def any_specs(draw):
    sigma = draw(sigmas)
    H = tuple(draw(st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])) for _ in range(5))
    return PolygonSpec(sigma, H)


def test_reference_heptagon_is_valid():
    spec = PolygonSpec((1, 2, 3), (-1, 1, -1, -1, -2))
    assert pg.validate(spec) == []


def test_sign_rule_violation_is_reported():
    # P(3.5) = (1.5)(0.5)(-2.5) < 0 forces H3 > 0
    assert pg.sign_polynomial((2, 3, 6), 3.5) == pytest.approx(-1.875)
    spec = PolygonSpec((2, 3, 6), (1, -1, -1, 1, 1))
    problems = pg.validate(spec)
    assert any("H3" in p and "sign rule" in p for p in problems)
    with pytest.raises(ValidationError):
        pg.check_valid(spec)


def test_zero_side_without_slit_is_degenerate():
    problems = pg.validate(PolygonSpec((1, 2, 3), (-1, 1, 0, -1, -2)))
    assert any("degeneracy" in p and "H3" in p for p in problems)


def test_vertices_of_reference():
    w = pg.vertices(PolygonSpec((1, 2, 3), (-1, 1, -1, -1, -2)))
    assert np.allclose(w, [0, -1j, -1 - 1j, -1, -2, -2 - 2j])


def test_all_zero_sides_collapse_to_origin():
    assert np.all(pg._vertices((0.0,) * 5) == 0)


def test_mirror_relabels_sigma_and_reflects_vertices():
    assert pg.mirror(PolygonSpec((1, 2, 6), (1, 1, 1, 1, 1))).sigma == (1, 5, 6)
    spec = PolygonSpec((1, 2, 3), (-1, 1, -1, -1, -2))
    v = -np.conj(pg.vertices(spec)[::-1])
    assert np.allclose(pg.vertices(pg.mirror(spec)), v - v[0])


@given(any_specs())
def test_mirror_is_an_involution_preserving_validity(spec):
    assert pg.mirror(pg.mirror(spec)) == spec
    assert (pg.validate(spec) == []) == (pg.validate(pg.mirror(spec)) == [])


@given(valid_specs())
def test_side_lengths_recover_H(spec):
    w = pg.vertices(spec)
    assert np.allclose(pg.side_lengths_from_vertices(w), spec.H)


def test_from_dict_reports_every_problem():
    with pytest.raises(InputError) as err:
        PolygonSpec.from_dict({"sigma": [1, 2], "H": [1, 2, 3, 4, 5], "colour": 1})
    msg = str(err.value)
    assert "sigma" in msg and "colour" in msg


def test_dict_roundtrip_and_checksum():
    spec = PolygonSpec((1, 2, 3), (-1, 1, -1, -1, -2), (0.3, 0.2, 0.1))
    again = PolygonSpec.from_dict(spec.to_dict())
    assert again == spec and again.checksum() == spec.checksum()
    assert PolygonSpec((1, 2, 3), (-1, 1, -1, -1, -2)).checksum() != spec.checksum()


def test_domain_status_and_distances():
    spec = PolygonSpec((1, 2, 3), (-1, 1, -1, -1, -2))
    assert pg.domain_status(spec, -0.5 + 0.5j) == 1
    assert pg.domain_status(spec, -0.5 - 0.5j) == 0
    assert float(pg.distance_to_vertices(spec, 0.1j)) == pytest.approx(0.1)
    assert float(pg.distance_to_boundary(spec, -0.5 + 0.5j)) == pytest.approx(0.5)


def test_slit_tips_follow_the_attached_side():
    spec = PolygonSpec((1, 2, 3), (-1, 1, -1, -1, -2), (0.3, 0.2, 0.1))
    tips = pg.slit_tips(spec)
    w = pg.vertices(spec)
    assert np.allclose(np.abs(tips - w[[0, 1, 2]]), [0.3, 0.2, 0.1])
    # the left ray runs through the vertices -1 and -2: an overlapping image
    assert pg.is_overlapping(spec) and pg.is_overlapping(PolygonSpec(spec.sigma, spec.H))
    assert not pg.is_overlapping(PolygonSpec((1, 3, 5), (-1, -1, 1, 1, -1)))
