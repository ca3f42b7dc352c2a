"""scikit-learn style wrapper: fit solves the parameter problem, transform maps points."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .mapping import MapContext
from .params import AuxParams
from .polygon import PolygonSpec, check_valid
from .solver import SolverOptions, solve, solve_slit


def _as_complex(X):
    """Complex 1-d view of X plus a flag telling whether X came as (n, 2) real pairs."""
    arr = np.asarray(X)
    if np.iscomplexobj(arr):
        return arr.ravel().astype(complex), False
    arr = np.asarray(arr, float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0] + 1j * arr[:, 1], True
    raise ValueError("points must be complex numbers or an (n, 2) array of (re, im) pairs")


def _restore(z, pairs):
    return np.column_stack([z.real, z.imag]) if pairs else z


class HeptagonMap(BaseEstimator, TransformerMixin):
    """Conformal map of a rectangular heptagon (optionally with slits) onto the upper half-plane.

    ``transform`` sends polygon points w to half-plane points x and
    ``inverse_transform`` goes back. Points are complex arrays or (n, 2)
    arrays of real pairs; the output uses the same layout.
    """

    def __init__(self, sigma=(1, 2, 3), H=(-1.0, 1.0, -1.0, -1.0, -2.0), slits=None,
                 slit_side="next", tol=1e-11, max_iter=20, init=None):
        self.sigma = sigma
        self.H = H
        self.slits = slits
        self.slit_side = slit_side
        self.tol = tol
        self.max_iter = max_iter
        self.init = init

    def _spec(self) -> PolygonSpec:
        slits = None if self.slits is None else tuple(self.slits)
        return check_valid(PolygonSpec(tuple(self.sigma), tuple(self.H), slits, self.slit_side))

    def fit(self, X=None, y=None):
        spec = self._spec()
        opts = SolverOptions(tol=self.tol, max_iter=self.max_iter)
        init = self.init if isinstance(self.init, AuxParams) or self.init is None else AuxParams.from_dict(self.init)
        params = solve_slit(spec, init, opts) if spec.has_slits else solve(spec, init, opts)
        self.spec_ = spec
        self.params_ = params
        self.context_ = MapContext(spec, params)
        self.residual_norm_ = float(params.residual_norm)
        self.n_iter_ = int(params.iterations)
        return self

    def transform(self, X):
        check_is_fitted(self, "context_")
        z, pairs = _as_complex(X)
        out = np.array([self.context_.forward(w) for w in z])
        return _restore(out, pairs)

    def inverse_transform(self, X):
        check_is_fitted(self, "context_")
        z, pairs = _as_complex(X)
        out = np.array([self.context_.inverse(x) for x in z])
        return _restore(out, pairs)

    def vertex_images(self):
        """Images of the finite corners (half-period points)."""
        check_is_fitted(self, "context_")
        ctx = self.context_
        return np.array([ctx.w_of_u(u) for u in ctx.half_periods])
