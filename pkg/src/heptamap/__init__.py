"""Conformal maps onto rectangular heptagons via genus-two theta functions."""

__version__ = "0.1.0"

from .estimator import HeptagonMap  # noqa: E402
from .polygon import PolygonSpec  # noqa: E402

__all__ = ["HeptagonMap", "PolygonSpec", "__version__"]
