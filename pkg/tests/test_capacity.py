import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heptamap.capacity import (CondenserSpec, Rectangle, Slit, condenser_capacity, condenser_polygon,
                               exterior_to_slots, slot_capacity, symmetric_pair_capacity,
                               validate_condenser)
from heptamap.exceptions import InputError, ValidationError


def _scaled(cond, lam):
    return CondenserSpec(tuple(Slit(lam * s.position, lam * s.half_length) for s in cond.slits))


def _preimage_intervals(coeffs):
    """Sorted intervals of {x real : P(x) in [-1, 1]} for a real polynomial with real preimages."""
    ends = []
    for v in (-1.0, 1.0):
        c = np.array(coeffs, float)
        c[-1] -= v
        r = np.roots(c)
        assert np.abs(r.imag).max() < 1e-12
        ends.extend(r.real)
    return np.sort(ends).reshape(-1, 2)


def test_interval_and_symmetric_pair():
    assert slot_capacity(np.array([[-1.0, 1.0]])) == pytest.approx(0.5, abs=1e-12)
    assert slot_capacity(np.array([[-1.0, -0.6], [0.6, 1.0]])) == pytest.approx(0.4, abs=1e-10)


def test_polynomial_preimage_capacity():
    # cap P^{-1}([-1, 1]) = (cap [-1, 1] / |leading coefficient|)^(1/deg)
    iv = _preimage_intervals([1.0, 0.0, -3.0, 0.0])
    assert iv.shape == (3, 2)
    assert abs(slot_capacity(iv) - 0.5 ** (1 / 3)) < 1e-9
    iv = _preimage_intervals([2.0, 0.7, -3.0])
    assert abs(slot_capacity(iv) - 0.25 ** 0.5) < 1e-9


@settings(max_examples=20)
@given(st.floats(0.05, 1.5), st.floats(0.1, 2.0), st.floats(-3, 3), st.floats(0.2, 5.0))
def test_slot_capacity_scales_and_translates(a, width, shift, lam):
    iv = np.array([[-a - width, -a], [a, a + 0.7 * width]])
    base = slot_capacity(iv)
    assert abs(slot_capacity(lam * iv + shift) - lam * base) < 1e-10 * lam * base


def test_flat_segment_goes_through_identity_route():
    cond = CondenserSpec(rectangles=(Rectangle(0.0, 4.0, 0.0),))
    ctx, slots = exterior_to_slots(cond)
    assert ctx is None and slots.info["route"] == "identity"
    assert condenser_capacity(cond) == pytest.approx(1.0, abs=1e-12)


def test_single_vertical_slit():
    # the slit [p - i l, p + i l] is a segment of length 2 l
    assert condenser_capacity(CondenserSpec((Slit(0.3, 0.8),))) == pytest.approx(0.4, abs=1e-9)


def test_symmetric_pair_of_slits():
    cond = CondenserSpec((Slit(-1.0, 0.5), Slit(1.0, 0.5)))
    cap, slots, _ = condenser_capacity(cond, details=True)
    iv = slots.intervals - slots.intervals.mean()
    assert abs(iv[0, 0] + iv[1, 1]) < 1e-9 and abs(iv[0, 1] + iv[1, 0]) < 1e-9
    assert abs(cap - symmetric_pair_capacity(iv[1, 0], iv[1, 1])) < 1e-9


def test_invariances_of_three_slits():
    cond = CondenserSpec((Slit(0.0, 1.0), Slit(2.4, 0.6), Slit(3.7, 0.3)))
    cap = condenser_capacity(cond)
    assert abs(condenser_capacity(cond.translated(-1.3)) - cap) < 1e-9 * cap
    assert abs(condenser_capacity(cond.mirrored()) - cap) < 1e-9 * cap
    assert abs(condenser_capacity(_scaled(cond, 2.5)) - 2.5 * cap) < 1e-9 * cap


def test_symmetric_three_slits_have_symmetric_slots():
    cond = CondenserSpec((Slit(-1.0, 0.5), Slit(0.0, 1.0), Slit(1.0, 0.5)))
    _, slots = exterior_to_slots(cond)
    iv = slots.intervals - 0.5 * (slots.intervals[0, 0] + slots.intervals[-1, 1])
    assert np.abs(iv + iv[::-1, ::-1]).max() < 1e-8


def test_theta_and_quadrature_routes_agree():
    cond = CondenserSpec((Slit(0.0, 1.0), Slit(0.4, 0.6), Slit(0.8, 0.3)))
    c_theta, s_theta, _ = condenser_capacity(cond, method="theta", details=True)
    c_quad, s_quad, _ = condenser_capacity(cond, method="quadrature", details=True)
    assert s_theta.info["route"] == "theta"
    assert abs(c_theta - c_quad) < 1e-10 * c_quad
    assert np.abs(s_theta.intervals - s_quad.intervals).max() < 1e-9


def test_capacity_grows_with_a_slit():
    lengths = (0.2, 0.4, 0.8)
    caps = [condenser_capacity(CondenserSpec((Slit(0.0, 1.0), Slit(1.5, L), Slit(3.0, 0.3))))
            for L in lengths]
    assert caps[0] < caps[1] < caps[2]
    # a subset has less capacity than the whole
    assert condenser_capacity(CondenserSpec((Slit(0.0, 1.0), Slit(3.0, 0.3)))) < caps[0]


def test_node_doubling_is_stable():
    cond = CondenserSpec((Slit(0.0, 1.0), Slit(2.4, 0.6), Slit(3.7, 0.3)))
    _, slots = exterior_to_slots(cond)
    assert abs(slot_capacity(slots, n0=32) - slot_capacity(slots, n0=16)) < 1e-5


def test_condenser_polygon_layout():
    spec = condenser_polygon(CondenserSpec((Slit(0.0, 1.0), Slit(0.4, 0.6), Slit(0.8, 0.3))))
    assert spec.sigma == (1, 3, 5)
    assert spec.H == pytest.approx((0.0, -0.4, 0.0, 0.4, 0.0))
    assert spec.slits == (1.0, 0.6, 0.3)


def test_guards():
    with pytest.raises(ValidationError):
        condenser_capacity(CondenserSpec(tuple(Slit(float(i), 0.5) for i in range(4))))
    thick = CondenserSpec(rectangles=(Rectangle(0.0, 1.0, 0.2),))
    assert any("thick" in p for p in validate_condenser(thick))
    mixed = CondenserSpec((Slit(3.0, 0.5),), (Rectangle(0.0, 1.0, 0.0),))
    assert any("combined" in p for p in validate_condenser(mixed))
    assert validate_condenser(CondenserSpec((Slit(0.0, 1.0), Slit(0.0, 0.5))))
    with pytest.raises(InputError):
        condenser_capacity(CondenserSpec((Slit(0.0, 1.0),)), method="theta")
    with pytest.raises(InputError):
        slot_capacity(np.array([[0.0, 1.0], [0.5, 2.0]]))
    with pytest.raises(InputError):
        CondenserSpec.from_dict({"slits": [{"position": 1}], "plates": []})
