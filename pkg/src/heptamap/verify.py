"""Invariant suites run by ``heptamap verify``.

Each suite draws its random cases from a seeded generator, measures a worst
residual against a fixed tolerance and reports a ``SuiteResult``. The quick
level uses smaller samples; the full level runs the extended ladders.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np

from . import theta as th
from .capacity import (CondenserSpec, Rectangle, Slit, condenser_capacity, slot_capacity,
                       symmetric_pair_capacity)
from .curve import CurvePoint, abel_jacobi, cs_quadrature, marked_point_image, period_basis
from .exceptions import HeptamapError
from .geometry import hausdorff_one_sided, polylines_cross
from .jacobian import Projection
from .mapping import MapContext
from .params import AuxParams
from .polygon import (PolygonSpec, boundary_path, distance_to_boundary, distance_to_vertices,
                      domain_status, finite_points)
from .solver import solve
from .streamlines import far_field_height, streamline, streamlines

REFERENCE = PolygonSpec((1, 2, 3), (-1.0, 1.0, -1.0, -1.0, -2.0))


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    cases: int
    seconds: float = 0.0
    checks: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


class _Checks:
    """Collects named (residual, tolerance) pairs; the suite passes when all do."""

    def __init__(self):
        self.items: dict[str, tuple[float, float]] = {}
        self.cases = 0

    def add(self, name, residual, tol):
        residual = float(residual)
        old = self.items.get(name)
        if old is None or residual > old[0] or not np.isfinite(residual):
            self.items[name] = (residual, tol)

    @property
    def passed(self):
        return all(np.isfinite(r) and r < t for r, t in self.items.values())

    def worst(self):
        """Largest residual relative to its tolerance, reported with that tolerance."""
        if not self.items:
            return 0.0, 0.0
        name = max(self.items, key=lambda k: self.items[k][0] / self.items[k][1]
                   if np.isfinite(self.items[k][0]) else np.inf)
        return self.items[name]


# ------------------------------------------------------------------ samplers


def random_cone_matrix(rng, lo=0.5, hi=3.0) -> np.ndarray:
    """Omega with diagonal in [lo, hi] and 0 < Omega12 < min(Omega11, Omega22)."""
    d = rng.uniform(lo, hi, 2)
    off = rng.uniform(0.05, 0.95) * d.min()
    return np.array([[d[0], off], [off, d[1]]])


def random_sextic(rng, spread=4.0, min_gap=0.2) -> np.ndarray:
    while True:
        x = np.sort(rng.uniform(-spread, spread, 6))
        if np.diff(x).min() > min_gap:
            return x


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


# ------------------------------------------------------------------ suites


def suite_theta(rng, level):
    """Quasi-periodicity, odd theta constants, gradient, and the series against a product formula."""
    ck = _Checks()
    n = 100
    for _ in range(n):
        om = random_cone_matrix(rng)
        u = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        m = rng.integers(-2, 3, 2)
        mp = rng.integers(-2, 3, 2)
        for ch in (th.ZERO_CHAR, th.CHAR_35):
            base = th.theta_char(ch, u, om)
            shifted = th.theta_char(ch, u + 1j * om @ m + mp, om)
            ck.add("quasi_periodicity", _rel(shifted, th.lattice_shift_factor(ch, u, om, m, mp) * base), 1e-12)
        scale = abs(th.theta(np.zeros(2), om))
        for ch in th.odd_characteristics():
            ck.add("odd_constants", abs(th.theta_char(ch, np.zeros(2), om)) / scale, 1e-13)
        g = th.grad_theta_char(th.CHAR_35, u, om)
        step = 1e-6
        fd = np.array([(th.theta_char(th.CHAR_35, u + step * e, om)
                        - th.theta_char(th.CHAR_35, u - step * e, om)) / (2 * step) for e in np.eye(2)])
        ck.add("gradient_fd", np.abs(fd - g).max() / max(np.abs(g).max(), 1.0), 1e-7)
        ck.cases += 1
    # the centred box makes quasi-periodicity exact whatever the truncation, so the
    # series itself is checked against a product of genus-1 thetas (diagonal Omega);
    # small diagonal entries make this sensitive to the truncation radius
    for _ in range(20 if level == "quick" else 40):
        d = rng.permutation([rng.uniform(0.08, 0.2), rng.uniform(0.5, 3.0)])
        u = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-0.5, 0.5, 2)
        with mpmath.workdps(30):
            ref = complex(mpmath.jtheta(3, mpmath.pi * complex(u[0]), mpmath.exp(-mpmath.pi * d[0]))
                          * mpmath.jtheta(3, mpmath.pi * complex(u[1]), mpmath.exp(-mpmath.pi * d[1])))
            # |theta(x + iy)| <= theta(iy): the natural scale near zeros of theta
            bound = float(mpmath.jtheta(3, mpmath.pi * 1j * u[0].imag, mpmath.exp(-mpmath.pi * d[0])).real
                          * mpmath.jtheta(3, mpmath.pi * 1j * u[1].imag, mpmath.exp(-mpmath.pi * d[1])).real)
        ck.add("product_formula", abs(complex(th.theta(u, np.diag(d))) - ref) / bound, 1e-12)
    return ck


def suite_periods(rng, level):
    ck = _Checks()
    count = 5 if level == "quick" else 20
    for _ in range(count):
        xs = random_sextic(rng)
        cur = period_basis(xs)
        Pi = cur.period_matrix
        ck.add("imaginary_periods", np.abs(Pi.real).max() / np.abs(Pi.imag).max(), 1e-9)
        ck.add("cone", 0.0 if th.in_cone(cur.omega) else 1.0, 0.5)
        for s in range(1, 7):
            u = abel_jacobi(cur, CurvePoint(complex(xs[s - 1]), 1))
            diff, _, _ = th.lattice_reduce(u - th.half_period(s, cur.omega), cur.omega)
            ck.add("half_periods", np.abs(diff).max(), 1e-8)
        ck.cases += 1
    sym = period_basis([-3, -2, -1, 1, 2, 3])
    ck.add("symmetric_diagonal", abs(sym.omega[0, 0] - sym.omega[1, 1]), 1e-9)
    return ck


def _curve_params(cur) -> AuxParams:
    # only Omega and u0 matter for theta divisor and projection checks
    return AuxParams(cur.omega, marked_point_image(cur), -1.0, 0.0, 0.0, 0.0)


def _random_curve_point(rng, xs):
    x = complex(rng.uniform(xs[0] - 2, xs[-1] + 2), rng.uniform(-3, 3))
    return CurvePoint(x, int(rng.choice([-1, 1])))


def suite_divisor(rng, level):
    ck = _Checks()
    curves, pts = (2, 10) if level == "quick" else (5, 50)
    for _ in range(curves):
        xs = random_sextic(rng)
        cur = period_basis(xs)
        for _ in range(pts):
            u = abel_jacobi(cur, _random_curve_point(rng, xs))
            ck.add("theta35_on_curve", abs(th.theta_char(th.CHAR_35, u, cur.omega)), 1e-8)
            ck.cases += 1
    return ck


def suite_projection(rng, level):
    ck = _Checks()
    xs = random_sextic(rng)
    cur = period_basis(xs)
    proj = Projection(_curve_params(cur))
    for _ in range(10 if level == "quick" else 50):
        p = _random_curve_point(rng, xs)
        x = complex(proj.value(abel_jacobi(cur, p)))
        ck.add("projection", abs(x - (p.x - xs[0]) / (xs[5] - xs[0])), 1e-7)
        ck.cases += 1
    return ck


_reference_cache: dict = {}


def reference_context() -> MapContext:
    if "ctx" not in _reference_cache:
        _reference_cache["ctx"] = MapContext(REFERENCE, solve(REFERENCE))
    return _reference_cache["ctx"]


def suite_heptagon(rng, level):
    ck = _Checks()
    ctx = reference_context()
    p = ctx.params
    H = np.array(REFERENCE.H)
    ck.add("residual_norm", p.residual_norm, 1e-10)
    w = np.array([ctx.w_of_u(u) for u in ctx.half_periods])
    sides = np.array([((w[s + 1] - w[s]) / 1j ** (s + 1)).real for s in range(5)])
    ck.add("side_lengths", np.abs(sides - H).max(), 1e-8)
    eps = np.finfo(float).eps * 8
    ck.add("linear_rows", max(abs(p.c1 + 2 * H[1]), abs(p.c2 - 2 * H[3]),
                              abs(np.pi * p.h - (H[0] - H[2] + H[4]))) / eps, 1.0)
    for _ in range(2 if level == "quick" else 10):
        v = p.vector() * (1 + 0.02 * rng.standard_normal(9))
        init = AuxParams.from_vector(v)
        if not init.admissible():
            continue
        q = solve(REFERENCE, init)
        ck.add("restart_uniqueness", np.abs(q.vector() - p.vector()).max(), 1e-8)
        ck.cases += 1
    return ck


def suite_oracle(rng, level):
    """Theta boundary values of w against the CS integral by direct quadrature."""
    ck = _Checks()
    ctx = reference_context()
    xs = ctx.branch_x
    A = ctx.asymptotic_scale()
    cur = period_basis(xs)
    ck.add("omega_match", np.abs(cur.omega - ctx.params.omega).max(), 1e-9)
    for s in range(5):
        for t in (0.3, 0.7):
            x = xs[s] + t * (xs[s + 1] - xs[s])
            wq = sum(cs_quadrature(cur, REFERENCE.sigma, A, xs[i], xs[i + 1]) for i in range(s))
            wq += cs_quadrature(cur, REFERENCE.sigma, A, xs[s], x)
            ck.add("boundary_values", abs(wq - ctx.inverse(x)), 1e-7)
            ck.cases += 1
    return ck


def interior_points(spec: PolygonSpec, n: int, rng, margin: float = 0.05, height: float = 1.0):
    """Random polygon points at least margin * diameter from every vertex and the boundary."""
    pts = finite_points(spec)
    diam = float(np.abs(pts[:, None] - pts[None, :]).max())
    lo, hi = pts.real.min() - 0.5 * diam, pts.real.max() + 0.5 * diam
    bottom, top = pts.imag.min(), pts.imag.max() + height * diam
    out = []
    while len(out) < n:
        w = complex(rng.uniform(lo, hi), rng.uniform(bottom, top))
        if domain_status(spec, w) != 1:
            continue
        if float(distance_to_vertices(spec, w)) < margin * diam:
            continue
        if float(distance_to_boundary(spec, w)) < margin * diam:
            continue
        out.append(w)
    return np.array(out)


def suite_roundtrip(rng, level):
    ck = _Checks()
    ctx = reference_context()
    n = 10 if level == "quick" else 100
    for w in interior_points(REFERENCE, n, rng):
        x = ctx.forward(w)
        ck.add("inverse_forward", abs(ctx.inverse(x) - w), 1e-9)
        ck.add("forward_inverse", abs(ctx.forward(ctx.inverse(x)) - x), 1e-9)
        ck.cases += 1
    return ck


def suite_capacity(rng, level):
    ck = _Checks()
    L = float(rng.uniform(0.5, 4.0))
    seg = CondenserSpec(rectangles=(Rectangle(0.0, L, 0.0),))
    ck.add("segment_quarter_length", abs(condenser_capacity(seg) - L / 4), 1e-6)
    a, b = sorted(rng.uniform(0.2, 2.0, 2))
    ck.add("symmetric_pair", abs(slot_capacity(np.array([[-b, -a], [a, b]])) - symmetric_pair_capacity(a, b)), 1e-6)
    two = CondenserSpec(slits=(Slit(-1.0, 0.5), Slit(1.0, 0.5)))
    cap, slots, _ = condenser_capacity(two, details=True)
    iv = slots.intervals - slots.intervals.mean()
    # symmetric slits map to slots symmetric about their centre
    ck.add("two_slit_pair_formula", abs(cap - symmetric_pair_capacity(iv[1, 0], iv[1, 1])), 1e-6)
    ck.add("translation", _rel(condenser_capacity(two.translated(0.37)), cap), 1e-9)
    ck.add("mirror", _rel(condenser_capacity(two.mirrored()), cap), 1e-9)
    if level == "full":
        three = CondenserSpec(slits=(Slit(0.0, 1.0), Slit(2.4, 0.6), Slit(3.7, 0.3)))
        _, slots3, _ = condenser_capacity(three, details=True)
        c1 = slot_capacity(slots3.intervals, n0=16)
        c2 = slot_capacity(slots3.intervals, n0=32)
        ck.add("node_doubling", _rel(c2, c1), 1e-5)
    ck.cases += 1
    return ck


def suite_streamlines(rng, level):
    ck = _Checks()
    ctx = reference_context()
    diam = ctx.diameter
    if level == "quick":
        lines = streamlines(ctx, [0.0, 0.5], x_range=5.0, samples=32)
    else:
        lines = streamlines(ctx, [0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2], x_range=10.0, samples=64)
    ck.add("boundary_hausdorff", hausdorff_one_sided(lines[0].w, boundary_path(REFERENCE)) / diam, 1e-6)
    crossed = any(polylines_cross(lines[i].w, lines[j].w)
                  for i in range(len(lines)) for j in range(i + 1, len(lines)))
    ck.add("crossings", float(crossed), 0.5)
    for X in (1e3, -1e3):
        x = complex(X, 1.0)
        ck.add("far_field", abs(ctx.inverse(x).imag - far_field_height(ctx, x)), 1e-4)
    ck.cases += len(lines)
    return ck


SUITES = {
    "theta": suite_theta,
    "periods": suite_periods,
    "divisor": suite_divisor,
    "projection": suite_projection,
    "heptagon": suite_heptagon,
    "oracle": suite_oracle,
    "roundtrip": suite_roundtrip,
    "capacity": suite_capacity,
    "streamlines": suite_streamlines,
}


def run_suite(name: str, level: str = "quick", seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng([seed, list(SUITES).index(name)])
    t0 = time.perf_counter()
    try:
        ck = SUITES[name](rng, level)
    except HeptamapError as exc:
        return SuiteResult(name, False, float("nan"), float("nan"), 0,
                           time.perf_counter() - t0, error=f"{type(exc).__name__}: {exc}")
    worst, tol = ck.worst()
    return SuiteResult(name, ck.passed, worst, tol, ck.cases, time.perf_counter() - t0,
                       checks={k: {"max_residual": r, "tolerance": t} for k, (r, t) in ck.items.items()})


def run_all(level: str = "quick", seed: int = 0, names=None) -> list[SuiteResult]:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    return [run_suite(n, level, seed) for n in (names or SUITES)]
