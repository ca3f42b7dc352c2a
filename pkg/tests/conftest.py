import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from heptamap.mapping import MapContext  # noqa: E402
from heptamap.polygon import PolygonSpec  # noqa: E402
from heptamap.solver import solve, solve_slit  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

REFERENCE = PolygonSpec((1, 2, 3), (-1.0, 1.0, -1.0, -1.0, -2.0))
SLIT_REFERENCE = PolygonSpec((1, 2, 3), (-1.0, 1.0, -1.0, -1.0, -2.0), (0.3, 0.2, 0.1))


@pytest.fixture(scope="session")
def reference_params():
    return solve(REFERENCE)


@pytest.fixture(scope="session")
def reference_ctx(reference_params):
    return MapContext(REFERENCE, reference_params)


@pytest.fixture(scope="session")
def slit_params():
    return solve_slit(SLIT_REFERENCE)


@pytest.fixture(scope="session")
def slit_ctx(slit_params):
    return MapContext(SLIT_REFERENCE, slit_params)


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)
