import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from heptamap.estimator import HeptagonMap
from heptamap.exceptions import ValidationError
from heptamap.polygon import vertices
from heptamap.verify import interior_points

from conftest import REFERENCE


@pytest.fixture(scope="module")
def fitted(reference_params):
    return HeptagonMap(init=reference_params).fit()


def test_unfitted_transform_raises():
    with pytest.raises(NotFittedError):
        HeptagonMap().transform(np.array([0.5j]))


def test_fit_records_solution(fitted):
    assert fitted.residual_norm_ < 1e-10
    assert fitted.spec_ == REFERENCE
    assert np.abs(fitted.vertex_images() - vertices(REFERENCE)).max() < 1e-8


def test_transform_round_trip_in_both_layouts(fitted, rng):
    w = interior_points(REFERENCE, 4, rng)
    x = fitted.transform(w)
    assert np.iscomplexobj(x) and np.all(x.imag > 0)
    assert np.abs(fitted.inverse_transform(x) - w).max() < 1e-9
    pairs = np.column_stack([w.real, w.imag])
    xp = fitted.transform(pairs)
    assert xp.shape == (4, 2)
    assert np.abs(xp[:, 0] + 1j * xp[:, 1] - x).max() < 1e-12


def test_params_and_clone():
    est = HeptagonMap(sigma=(1, 3, 5), H=(-1, -1, 1, 1, -1))
    assert est.get_params()["sigma"] == (1, 3, 5)
    again = clone(est)
    assert again.get_params() == est.get_params()
    est.set_params(tol=1e-12)
    assert est.tol == 1e-12


def test_invalid_polygon_is_rejected_at_fit():
    with pytest.raises(ValidationError):
        HeptagonMap(sigma=(2, 3, 6), H=(1, -1, -1, 1, 1)).fit()


def test_bad_point_layout(fitted):
    with pytest.raises(ValueError):
        fitted.transform(np.zeros((3, 3)))


def test_fit_with_slits(slit_params):
    est = HeptagonMap(slits=(0.3, 0.2, 0.1), init=slit_params).fit()
    assert est.residual_norm_ < 1e-10
    assert est.spec_.has_slits
