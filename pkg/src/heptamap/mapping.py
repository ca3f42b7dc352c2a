"""Point mapping between the upper half-plane (x) and the polygon (w).

Both directions solve a holomorphic 2x2 system in the Jacobian variable u,
with the theta divisor as the second equation, by predictor-corrector
continuation along a straight path from a stored seed:

* inverse (x -> w):  x(u) = x*,  theta[35](u) = 0, then w = w(u);
* forward (w -> x):  w(u) = w*,  theta[35](u) = 0, then x = x(u).

Near x = infinity the first equation is replaced by 1/x(u) = 1/x*.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DomainError, InputError, PathError, PoleError
from .jacobian import (ANCHOR_CHAR, POLE_MARGIN, Projection, _w_formula, marked_gradient,
                       w_gradient, w_value)
from .params import AuxParams
from .polygon import (PolygonSpec, boundary_path, check_valid, diameter, distance_to_boundary,
                      domain_status, finite_points, visible)
from .theta import CHAR_35, block_coordinates, block_half_period, theta_jet

log = logging.getLogger(__name__)

STEP_FRACTION = 0.3
NEWTON_TOL = 1e-14
BLOCK_SLACK = 1e-6
ACCEPT_RES = 1e-10


@dataclass
class _Seed:
    x: complex
    u: np.ndarray
    w: complex


class MapContext:
    """Solved parameters plus everything needed to evaluate and invert the map."""

    def __init__(self, spec: PolygonSpec, params: AuxParams, odd_char=CHAR_35,
                 j: int = 1, l: int = 6, k: int = 3, pole_margin: float = POLE_MARGIN,
                 boundary_margin: float | None = None):
        check_valid(spec)
        self.spec = spec
        self.params = params
        self.odd_char = odd_char
        self.pole_margin = pole_margin
        self.g = marked_gradient(params)
        self.projection = Projection(params, j, l, k)
        self.half_periods = np.array([block_half_period(s, params.omega) for s in range(1, 7)])
        self.branch_x = self.projection.value(self.half_periods).real
        self.diameter = diameter(spec)
        self.boundary_margin = 1e-10 * self.diameter if boundary_margin is None else boundary_margin
        self._path = boundary_path(spec)
        self._points = finite_points(spec)
        self.far_radius = 4.0 * (1.0 + np.abs(self.branch_x).max())
        self._offset = 0j
        if odd_char != CHAR_35:
            self._offset = complex(_w_formula(odd_char, params, np.zeros(2, complex), self.g))
        self.anchor = -complex(self._raw_w(np.zeros(2, complex)))
        self._x_seeds: list[_Seed] = []
        self._w_seeds: list[_Seed] | None = None

    # ---------------------------------------------------------- evaluation

    def _raw_w(self, u):
        if self.odd_char == CHAR_35:
            return w_value(self.params, u, self.g)
        return _w_formula(self.odd_char, self.params, np.asarray(u, complex), self.g) - self._offset

    def w_of_u(self, u):
        u = np.asarray(u, complex)
        self._check_pole(u)
        return self._raw_w(u) + self.anchor

    def grad_w_of_u(self, u):
        u = np.asarray(u, complex)
        self._check_pole(u)
        return w_gradient(self.params, u, None, self.g)

    def x_of_u(self, u, j: int | None = None, l: int | None = None, k: int | None = None):
        proj = self.projection
        if (j, l, k) != (None, None, None):
            proj = Projection(self.params, j or proj.j, l or proj.l, k or proj.k)
        u = np.asarray(u, complex)
        self._check_pole(u)
        return proj.value(u)

    def _check_pole(self, u):
        u0 = self.params.u0
        for sgn in (1, -1):
            d = u.reshape(-1, 2) - sgn * u0
            eps, eps_p = block_coordinates(d, self.params.omega)
            red = np.concatenate([eps - 2 * np.round(eps / 2), eps_p - 2 * np.round(eps_p / 2)], axis=-1)
            if np.any(np.abs(red).max(axis=-1) < self.pole_margin):
                raise PoleError("point within the pole margin of +-u0")

    def theta_residual(self, u):
        return theta_jet(CHAR_35, np.asarray(u, complex), self.params.omega, 0)[0]

    def in_block(self, u, slack: float = BLOCK_SLACK) -> bool:
        eps, eps_p = block_coordinates(np.asarray(u, complex), self.params.omega)
        return bool(np.all(eps >= -1 - slack) and np.all(eps <= slack)
                    and np.all(eps_p >= -slack) and np.all(eps_p <= 1 + slack))

    # ---------------------------------------------------- Newton machinery

    def _jets(self, u, mode):
        t, gt = theta_jet(CHAR_35, u, self.params.omega, 1)
        if mode == "x":
            f, gf = self.projection.value_and_gradient(u)
        elif mode == "q":
            f, gf = self.projection.reciprocal_and_gradient(u)
        else:
            f, gf = self._raw_w(u) + self.anchor, w_gradient(self.params, u, None, self.g)
        return complex(f), gf, complex(t), gt

    def _newton(self, u, target, mode, max_iter=25):
        """Complex Newton; stops at the evaluation noise floor (detected by stalled steps)."""
        u = np.array(u, complex)
        scale = 1.0 + abs(target)
        best_u, best_res = u, np.inf
        last_step = np.inf
        for _ in range(max_iter):
            f, gf, t, gt = self._jets(u, mode)
            res = max(abs(f - target) / scale, abs(t))
            if res < best_res:
                best_u, best_res = u, res
            if res <= 1e-15:
                return u
            try:
                du = np.linalg.solve(np.array([gf, gt]), -np.array([f - target, t]))
            except np.linalg.LinAlgError:
                break
            step = np.abs(du).max()
            if step <= NEWTON_TOL * (1 + np.abs(u).max()) and res <= ACCEPT_RES:
                return u + du
            if step > 0.5 * last_step and best_res <= ACCEPT_RES:
                return best_u
            last_step = step
            u = u + du
        if best_res <= ACCEPT_RES:
            return best_u
        raise ConvergenceError(f"mapping Newton did not converge (|F|={best_res:.2e})",
                               best=best_u, residual=float(best_res))

    def _track(self, u, start, target, mode, hazards, rel_step=STEP_FRACTION):
        """Continue u along the straight path start -> target of the mode's function."""
        z = complex(start)
        u = np.array(u, complex)
        frac = rel_step
        while z != target:
            d = float(np.abs(z - hazards).min()) if len(hazards) else np.inf
            step = min(abs(target - z), frac * d)
            if step <= 1e-15 * (1 + abs(z)):
                raise PathError("continuation path runs into a singular point")
            z_new = target if step >= abs(target - z) else z + step * (target - z) / abs(target - z)
            f, gf, t, gt = self._jets(u, mode)
            try:
                du = np.linalg.solve(np.array([gf, gt]), np.array([z_new - f, -t]))
                pred = u + du
                u_new = self._newton(pred, z_new, mode)
            except (ConvergenceError, PoleError, np.linalg.LinAlgError):
                frac *= 0.5
                if frac < 1e-4:
                    raise ConvergenceError("continuation step collapsed", best=u) from None
                continue
            u, z = u_new, z_new
            frac = min(rel_step, 1.5 * frac)
        return u

    # --------------------------------------------------------------- inverse

    def _far_seed(self):
        if not self._x_seeds:
            x_far = 1j * self.far_radius
            u = self._track(self.params.u0.astype(complex), 0j, 1 / x_far, "q",
                            1 / self.branch_x[self.branch_x != 0])
            self._x_seeds.append(_Seed(x_far, u, complex(self.w_of_u(u))))
        return self._x_seeds[0]

    def inverse_u(self, x_star) -> np.ndarray:
        x_star = complex(x_star)
        if not np.isfinite(x_star):
            raise InputError("x must be finite")
        if x_star.imag < 0:
            raise DomainError("x must lie in the closed upper half-plane")
        db = np.abs(x_star - self.branch_x)
        if db.min() <= 1e-13 * (1 + abs(x_star)):
            return self.half_periods[int(np.argmin(db))].copy()
        if abs(x_star) > self.far_radius:
            nz = self.branch_x[self.branch_x != 0]
            return self._track(self.params.u0.astype(complex), 0j, 1 / x_star, "q", 1 / nz)
        self._far_seed()
        seed = min(self._x_seeds, key=lambda s: abs(s.x - x_star))
        return self._track(seed.u, seed.x, x_star, "x", self.branch_x)

    def inverse(self, x_star) -> complex:
        """Polygon point w for a point x of the closed upper half-plane."""
        u = self.inverse_u(x_star)
        return complex(self.w_of_u(u))

    def add_x_seed(self, x, u):
        self._x_seeds.append(_Seed(complex(x), np.asarray(u, complex), complex(self.w_of_u(u))))

    # --------------------------------------------------------------- forward

    def _seed_grid(self):
        xs = self.branch_x
        lo, hi = xs.min(), xs.max()
        mid, span = 0.5 * (lo + hi), hi - lo
        pts = []
        for rho in (0.6, 1.0, 2.0, 5.0):
            for phi in np.linspace(0.1, np.pi - 0.1, 8):
                pts.append(mid + rho * span * np.exp(1j * phi))
        gaps = np.concatenate([[lo - span], xs, [hi + span]])
        for a, b in zip(gaps[:-1], gaps[1:]):
            for t in (0.25, 0.5, 0.75):
                pts.append(a + t * (b - a) + 1j * 0.05 * (b - a))
                pts.append(a + t * (b - a) + 1j * 0.3 * (b - a))
        return pts

    def _build_w_seeds(self):
        seeds = []
        for x in self._seed_grid():
            try:
                u = self.inverse_u(x)
            except (ConvergenceError, DomainError):
                continue
            w = complex(self.w_of_u(u))
            seeds.append(_Seed(complex(x), u, w))
            self._x_seeds.append(seeds[-1])
        self._w_seeds = seeds

    def forward_u(self, w_star) -> np.ndarray:
        w_star = complex(w_star)
        if not np.isfinite(w_star):
            raise InputError("w must be finite")
        if float(distance_to_boundary(self.spec, w_star)) <= self.boundary_margin:
            raise DomainError(f"w={w_star} lies on the boundary or within the margin")
        status = domain_status(self.spec, w_star)
        if status == 0:
            raise DomainError(f"w={w_star} lies outside the polygon")
        if status > 1:
            raise DomainError(f"w={w_star} lies in an overlapping region (winding number {status})")
        if self._w_seeds is None:
            self._build_w_seeds()
        order = sorted(self._w_seeds, key=lambda s: abs(s.w - w_star))
        last_exc = None
        tried = 0
        for seed in order:
            if not visible(self.spec, seed.w, w_star, self._path):
                continue
            tried += 1
            try:
                u = self._track(seed.u, seed.w, w_star, "w", self._points)
            except (ConvergenceError, PathError, PoleError) as exc:
                last_exc = exc
                if tried >= 4:
                    break
                continue
            if not self.in_block(u):
                last_exc = ConvergenceError("forward solution left the characteristic block", best=u)
                continue
            return u
        if last_exc is None:
            raise PathError(f"no seed sees w={w_star} inside the polygon")
        raise last_exc

    def forward(self, w_star) -> complex:
        """Upper half-plane point x for an interior polygon point w."""
        u = self.forward_u(w_star)
        return complex(self.x_of_u(u))

    # ------------------------------------------------------------ asymptotics

    def asymptotic_scale(self) -> float:
        """A' in w = A' x - h log x + C + O(1/x), from the pole of w and of x at u0."""
        p = self.params
        om = p.omega
        g = self.g
        v = np.array([g[1], -g[0]], complex)
        t0 = theta_jet(CHAR_35, np.zeros(2), om, 1)[1]
        proj = self.projection
        tk = theta_jet(proj.den_char, np.zeros(2), om, 1)[1]
        b0 = theta_jet(proj.den_char, 2 * p.u0, om, 0)[0]
        a0 = theta_jet(proj.num_char, p.u0, om, 0)[0]
        wres = p.c * (t0[0] * g[1] - t0[1] * g[0]) / (t0 @ v)
        qslope = b0 * (tk @ v) / (proj.kappa * a0 * a0)
        return float((wres * qslope).real)


def asymptotic_scale_richardson(ctx: MapContext, ladder=(1e2, 1e3, 1e4)) -> float:
    """Cross-check of A' from Im w(iT) / T, extrapolated in 1/T."""
    T = np.asarray(ladder, float)
    vals = np.array([ctx.inverse(1j * t).imag / t for t in T])
    V = np.vander(1 / T, len(T), increasing=True)
    return float(np.linalg.solve(V, vals)[0])


def inverse_many(ctx: MapContext, xs) -> np.ndarray:
    return np.array([ctx.inverse(x) for x in np.ravel(xs)]).reshape(np.shape(xs))


def forward_many(ctx: MapContext, ws) -> np.ndarray:
    return np.array([ctx.forward(w) for w in np.ravel(ws)]).reshape(np.shape(ws))
