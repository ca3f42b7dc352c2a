"""Logarithmic capacity of axisymmetric slit condensers.

The upper half of the condenser exterior is mapped onto the upper half-plane
with hydrodynamic normalisation w = X + o(1), which carries the condenser to
a union of slots on the real line with the same capacity. The slot capacity
comes from an equilibrium-measure collocation solver.

Three routes produce the slot system:

* flat segments on the axis only: the identity map;
* one or two slits: direct quadrature of dw = prod(x - xi_k) / sqrt(prod (x - a_k)(x - b_k)) dx;
* three slits: the theta-function decagon solver with sigma = (1, 3, 5).
"""
from __future__ import annotations

import hashlib
import json
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize, special

from .curve import _converged_segment, y_upper
from .exceptions import AccuracyError, ConvergenceError, DomainError, InputError, ValidationError
from .polygon import PolygonSpec

log = logging.getLogger(__name__)

MAX_SLITS = 3


@dataclass(frozen=True)
class Slit:
    position: float
    half_length: float


@dataclass(frozen=True)
class Rectangle:
    x_min: float
    x_max: float
    half_height: float


@dataclass(frozen=True)
class CondenserSpec:
    slits: tuple = ()
    rectangles: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "slits", tuple(sorted(self.slits, key=lambda s: s.position)))
        object.__setattr__(self, "rectangles", tuple(sorted(self.rectangles, key=lambda r: r.x_min)))

    @classmethod
    def from_dict(cls, data) -> "CondenserSpec":
        if not isinstance(data, dict):
            raise InputError("condenser description must be a JSON object")
        problems = [f"unknown field '{k}'" for k in data if k not in ("slits", "rectangles")]
        slits, rects = [], []
        for i, s in enumerate(data.get("slits", [])):
            try:
                slits.append(Slit(float(s["position"]), float(s["half_length"])))
            except (KeyError, TypeError, ValueError):
                problems.append(f"slit {i + 1} needs numeric 'position' and 'half_length'")
        for i, r in enumerate(data.get("rectangles", []) or []):
            try:
                rects.append(Rectangle(float(r["x_min"]), float(r["x_max"]), float(r["half_height"])))
            except (KeyError, TypeError, ValueError):
                problems.append(f"rectangle {i + 1} needs numeric 'x_min', 'x_max' and 'half_height'")
        if problems:
            raise InputError("; ".join(problems))
        return cls(tuple(slits), tuple(rects))

    def to_dict(self) -> dict:
        out = {"slits": [{"position": s.position, "half_length": s.half_length} for s in self.slits]}
        if self.rectangles:
            out["rectangles"] = [{"x_min": r.x_min, "x_max": r.x_max, "half_height": r.half_height}
                                 for r in self.rectangles]
        return out

    def checksum(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]

    def translated(self, dx: float) -> "CondenserSpec":
        return CondenserSpec(tuple(Slit(s.position + dx, s.half_length) for s in self.slits),
                             tuple(Rectangle(r.x_min + dx, r.x_max + dx, r.half_height)
                                   for r in self.rectangles))

    def mirrored(self) -> "CondenserSpec":
        return CondenserSpec(tuple(Slit(-s.position, s.half_length) for s in self.slits),
                             tuple(Rectangle(-r.x_max, -r.x_min, r.half_height) for r in self.rectangles))


def validate_condenser(cond: CondenserSpec) -> list[str]:
    out = []
    n = len(cond.slits) + len(cond.rectangles)
    if n == 0:
        out.append("condenser has no components")
    if len(cond.slits) > MAX_SLITS:
        out.append(f"at most {MAX_SLITS} slits are supported (genus-two scope), got {len(cond.slits)}")
    for i, s in enumerate(cond.slits):
        if not (np.isfinite(s.position) and np.isfinite(s.half_length)) or s.half_length <= 0:
            out.append(f"slit {i + 1} must have a finite position and a positive half_length")
    for i, r in enumerate(cond.rectangles):
        if not (r.x_max > r.x_min) or r.half_height < 0:
            out.append(f"rectangle {i + 1} needs x_max > x_min and half_height >= 0")
        elif r.half_height > 0:
            out.append(f"rectangle {i + 1}: thick plates are not supported "
                       "(their half exterior is not a heptagon or slit decagon)")
    if cond.slits and cond.rectangles:
        out.append("slits and flat segments cannot be combined")
    spans = sorted([(s.position, s.position) for s in cond.slits]
                   + [(r.x_min, r.x_max) for r in cond.rectangles])
    for (a0, b0), (a1, b1) in zip(spans[:-1], spans[1:]):
        if a1 <= b0:
            out.append("condenser components must be pairwise disjoint")
            break
    return out


def check_condenser(cond: CondenserSpec) -> CondenserSpec:
    problems = validate_condenser(cond)
    if problems:
        raise ValidationError(problems)
    return cond


@dataclass(frozen=True)
class SlotSystem:
    intervals: np.ndarray  # (m, 2) sorted, disjoint
    scale: float = 1.0
    offset: float = 0.0
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        iv = np.asarray(self.intervals, float).reshape(-1, 2)
        if iv.shape[0] == 0:
            raise InputError("a slot system needs at least one interval")
        if np.any(iv[:, 1] <= iv[:, 0]) or np.any(iv[1:, 0] <= iv[:-1, 1]):
            raise InputError("slot intervals must be non-empty, sorted and disjoint")
        if not self.scale > 0:
            raise InputError("slot scale must be positive")
        object.__setattr__(self, "intervals", iv)


# ---------------------------------------------------------------- capacity


def _log_kernel(xi, n_max):
    """int log|xi - s| T_n(s) ds / (pi sqrt(1 - s^2)) for n = 0..n_max-1, real xi."""
    xi = np.asarray(xi, float)
    out = np.empty(xi.shape + (n_max,))
    inside = np.abs(xi) <= 1
    n = np.arange(1, n_max)
    th = np.arccos(np.clip(xi[inside], -1, 1))
    out[inside, 0] = -np.log(2.0)
    out[inside, 1:] = -np.cos(np.multiply.outer(th, n)) / n
    xo = xi[~inside]
    z = xo + np.sign(xo) * np.sqrt(xo * xo - 1)  # |z| > 1, xi = (z + 1/z) / 2
    out[~inside, 0] = np.log(np.abs(z)) - np.log(2.0)
    out[~inside, 1:] = -np.power.outer(1.0 / z, n) / n
    return out


def _collocation_capacity(iv: np.ndarray, N: int):
    m = iv.shape[0]
    mid, rad = iv.mean(axis=1), 0.5 * (iv[:, 1] - iv[:, 0])
    s = np.cos(np.pi * (np.arange(N) + 0.5) / N)
    x = (mid[:, None] + rad[:, None] * s[None, :]).ravel()
    A = np.zeros((m * N + 1, m * N + 1))
    for i in range(m):
        K = _log_kernel((x - mid[i]) / rad[i], N)
        K[:, 0] += np.log(rad[i])
        A[:m * N, i * N:(i + 1) * N] = K
        A[m * N, i * N] = 1.0
    A[:m * N, -1] = -1.0
    rhs = np.zeros(m * N + 1)
    rhs[-1] = 1.0
    sol = np.linalg.solve(A, rhs)
    return float(np.exp(sol[-1])), sol, A


def slot_capacity(slots: SlotSystem | np.ndarray, tol: float = 1e-8, n0: int = 8,
                  n_max: int = 2048, details: bool = False):
    """Logarithmic capacity of a union of real intervals.

    The equilibrium density on each interval is a Chebyshev series times the
    arcsine weight; collocation at Chebyshev points gives the coefficients and
    the equilibrium potential V, and C = exp(V). The node count doubles until
    successive capacities agree to ``tol`` (relative).
    """
    iv = slots.intervals if isinstance(slots, SlotSystem) else SlotSystem(slots).intervals
    N = n0
    prev, _, _ = _collocation_capacity(iv, N)
    while True:
        N *= 2
        cap, sol, A = _collocation_capacity(iv, N)
        change = abs(cap - prev) / cap
        if change < tol:
            break
        if 2 * N > n_max:
            cond = float(np.linalg.cond(A))
            raise AccuracyError(f"slot capacity did not settle (change {change:.2e}, "
                                f"condition number {cond:.2e}); slots may nearly touch",
                                best=cap, residual=change)
        prev = cap
    if details:
        return cap, {"nodes_per_slot": N, "relative_change": change}
    return cap


def interval_capacity(a: float, b: float) -> float:
    return 0.25 * (b - a)


def symmetric_pair_capacity(a: float, b: float) -> float:
    """Capacity of [-b, -a] U [a, b]."""
    return 0.5 * np.sqrt(b * b - a * a)


# ------------------------------------------------------- direct quadrature


def _slot_integrand(zeros):
    zeros = np.asarray(zeros, float)
    return lambda x: np.prod(x[:, None] - zeros[None, :], axis=1)


def _slot_integral(ends, zeros, a, b, tol=1e-13):
    """int_a^b prod(x - xi) / y dx, y = prod sqrt(x - e) over all slot ends (upper side)."""
    xs = np.sort(np.asarray(ends, float))
    scale = max(1.0, np.abs(xs).max())
    left = bool(np.min(np.abs(xs - a)) <= 1e-14 * scale)
    right = bool(np.min(np.abs(xs - b)) <= 1e-14 * scale)
    val, _ = _converged_segment(_slot_integrand(zeros), a, b, xs, left, right, tol)
    return complex(val)


def _unpack_slots(v, n):
    """Ordered ends (a_1 = 0) and zeros from log gaps and logistic zero positions."""
    ends = np.concatenate([[0.0], np.cumsum(np.exp(v[:2 * n - 1]))])
    a, b = ends[0::2], ends[1::2]
    xi = a + (b - a) * special.expit(v[2 * n - 1:])
    return ends, a, b, xi


def _pack_slots(a, b, xi):
    ends = np.ravel(np.column_stack([a, b]))
    t = (xi - a) / (b - a)
    return np.concatenate([np.log(np.diff(ends)), np.log(t / (1 - t))])


def _map_equations(v, pos, height):
    n = len(pos)
    ends, a, b, xi = _unpack_slots(v, n)
    rows = []
    if not np.all(np.isfinite(ends)) or np.any(np.diff(ends) <= 0):
        return np.full(3 * n - 1, 1e3)
    for k in range(n):
        rise = _slot_integral(ends, xi, a[k], xi[k])
        fall = _slot_integral(ends, xi, xi[k], b[k])
        rows += [rise.imag - height[k], rise.imag + fall.imag]
    for k in range(n - 1):
        rows.append(_slot_integral(ends, xi, b[k], a[k + 1]).real - (pos[k + 1] - pos[k]))
    return np.array(rows)


def _far_constant(ends, zeros, a1):
    """-int_{-inf}^{a1} (dw/dx - 1) dx, the shift making w(x) - x vanish at infinity."""
    ends = np.asarray(ends, float)
    zeros = np.asarray(zeros, float)
    span = max(1.0, ends[-1] - ends[0], abs(a1))

    def excess(x):
        # left of every end all factors are negative; log1p keeps R - 1 accurate far out
        if x < -span:
            lr = np.log1p(-zeros / x).sum() - 0.5 * np.log1p(-ends / x).sum()
        else:
            lr = np.log(zeros - x).sum() - 0.5 * np.log(ends - x).sum()
        return np.expm1(lr)

    # x = a1 - v^2 removes the inverse square root at a1; beyond X the excess is k / x^2
    V = 1e4 * np.sqrt(span)
    pieces = [0.0, 1.0, 10.0, 100.0, 1e3, V]
    with warnings.catch_warnings():
        # the outer pieces sit at the roundoff floor of the excess; quad says so, harmlessly
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val = sum(integrate.quad(lambda v: 2 * v * excess(a1 - v * v), p, q,
                                 epsabs=1e-16, epsrel=1e-13, limit=200)[0]
                  for p, q in zip(pieces[:-1], pieces[1:]))
    X = a1 - V * V
    return -(val + excess(X) * abs(X))


def direct_slots(cond: CondenserSpec, tol: float = 1e-12) -> SlotSystem:
    """Slot system of a slit condenser by direct quadrature (any slit count up to three)."""
    pos = np.array([s.position for s in cond.slits])
    height = np.array([s.half_length for s in cond.slits])
    n = len(pos)

    def guess(lam):
        return _pack_slots(pos - lam * height, pos + lam * height, pos)

    extent = pos[-1] - pos[0] + 2 * height.sum()

    def solve_at(lam_h, v0):
        try:
            res = optimize.root(_map_equations, v0, args=(pos - pos[0], lam_h * height),
                                method="hybr", options={"xtol": 1e-14})
        except AccuracyError:
            return v0, False
        # hybr may report xtol stagnation at the roundoff floor; judge by the residual
        ok = bool(np.abs(res.fun).max() < tol * max(1.0, height.max()))
        # slot images never spread far beyond the condenser itself
        ok = ok and _unpack_slots(res.x, n)[0][-1] < 4 * extent
        return res.x, ok

    # grow the slits from short ones, where the isolated-slit guess is accurate
    gap = np.diff(pos).min() if n > 1 else np.inf
    lam0 = min(1.0, 0.1 * gap / height.max())
    for _ in range(8):
        v, ok = solve_at(lam0, guess(lam0))
        if ok:
            break
        lam0 /= 2
    else:
        raise ConvergenceError("direct slot solve failed for short slits")
    lam, prev = lam0, None
    step = min(0.25, 1.0 - lam0)
    while lam < 1.0:
        target = min(1.0, lam + step)
        v0 = v if prev is None else v + (v - prev[1]) * (target - lam) / (lam - prev[0])
        vt, ok = solve_at(target, v0)
        if ok:
            prev, lam, v = (lam, v), target, vt
            step = min(2 * step, 0.5)
        else:
            step /= 2
            if step < 1e-4:
                raise ConvergenceError(f"direct slot solve stalled at {lam:.4g} of the slit heights")
    ends, a, b, xi = _unpack_slots(v, n)
    # hydrodynamic coordinate: X = x + C with w(x) - x -> 0 at infinity
    C = pos[0] - a[0] + _far_constant(ends, xi, a[0])
    iv = np.column_stack([a + C, b + C])
    return SlotSystem(iv, 1.0, float(C), {"route": "quadrature", "zeros": (xi + C).tolist(),
                                          "residual": float(np.abs(_map_equations(v, pos - pos[0], height)).max())})


# ----------------------------------------------------------- theta route


def condenser_polygon(cond: CondenserSpec) -> PolygonSpec:
    """Three-slit condenser as a slit decagon of type (1, 3, 5) with vanishing odd sides."""
    p = [s.position for s in cond.slits]
    L = [s.half_length for s in cond.slits]
    return PolygonSpec((1, 3, 5), (0.0, -(p[1] - p[0]), 0.0, p[2] - p[1], 0.0), tuple(L))


def far_constant(ctx, ladder=(25.0, 50.0, 100.0)) -> float:
    """Real C in w = A' x + C + O(1/x), from Re(w(iT) - A' i T) extrapolated in 1/T^2."""
    A = ctx.asymptotic_scale()
    T = np.asarray(ladder, float)
    vals = np.array([(ctx.inverse(1j * t) - A * 1j * t).real for t in T])
    V = np.vander(1 / T ** 2, len(T), increasing=True)
    return float(np.linalg.solve(V, vals)[0])


def quadrature_seed(cond: CondenserSpec, spec: PolygonSpec | None = None):
    """Theta parameters read off the direct slot map, as a Newton start for the theta route.

    With the slot ends rescaled to x_1 = 0, x_6 = 1, Omega and u0 come from the
    period basis of the ends and the zeros are the AJ images of the critical
    points; c1, c2 follow from the linear rows, h vanishes and c is the
    least-squares fit of the (linear in c) residual.
    """
    from .curve import CurvePoint, abel_jacobi, marked_point_image, period_basis
    from .params import AuxParams
    from .solver import residual_slit

    spec = condenser_polygon(cond) if spec is None else spec
    q = direct_slots(cond)
    ends = np.ravel(q.intervals)
    span = ends[-1] - ends[0]
    cur = period_basis((ends - ends[0]) / span)
    xi = (np.asarray(q.info["zeros"]) - ends[0]) / span
    zeros = np.array([abel_jacobi(cur, CurvePoint(complex(z), 1)) for z in xi])
    H = spec.H
    base = dict(omega=cur.omega, u0=marked_point_image(cur), c1=-2 * H[1], c2=2 * H[3], h=0.0,
                zeros=zeros)
    r0 = residual_slit(spec, AuxParams(c=0.0, **base))
    r1 = residual_slit(spec, AuxParams(c=-1.0, **base)) - r0
    c = -float(r0 @ r1 / (r1 @ r1))
    return AuxParams(c=c, **base)


def theta_slots(cond: CondenserSpec, init=None, options=None):
    from .mapping import MapContext
    from .solver import solve_slit

    spec = condenser_polygon(cond)
    if init is None:
        try:
            init = quadrature_seed(cond, spec)
        except (ConvergenceError, DomainError) as exc:
            log.info("no quadrature seed for the theta route (%s); starting from the heptagon", exc)
    params = solve_slit(spec, init, options)
    ctx = MapContext(spec, params)
    A = ctx.asymptotic_scale()
    if abs(params.h) > 1e-12:
        raise AccuracyError("condenser map has a logarithmic term; the far field is not flat")
    C = far_constant(ctx) + cond.slits[0].position
    xb = ctx.branch_x
    iv = np.column_stack([A * xb[0::2] + C, A * xb[1::2] + C])
    if np.any(iv[1:, 0] <= iv[:-1, 1]):
        raise AccuracyError("slot images overlap; the solved map is inconsistent")
    return ctx, SlotSystem(iv, float(A), float(C), {"route": "theta", "residual": params.residual_norm})


def exterior_to_slots(cond: CondenserSpec, method: str = "auto"):
    """(map context or None, slot system) for a condenser.

    ``method`` is "auto", "theta" (three slits only) or "quadrature".
    """
    check_condenser(cond)
    if cond.rectangles:
        iv = np.array([[r.x_min, r.x_max] for r in cond.rectangles])
        return None, SlotSystem(iv, 1.0, 0.0, {"route": "identity"})
    n = len(cond.slits)
    if method == "auto":
        method = "theta" if n == MAX_SLITS else "quadrature"
    if method == "theta":
        if n != MAX_SLITS:
            raise InputError("the theta route needs exactly three slits")
        return theta_slots(cond)
    if method == "quadrature":
        return None, direct_slots(cond)
    raise InputError(f"unknown method '{method}'")


def condenser_capacity(cond: CondenserSpec, method: str = "auto", details: bool = False):
    _, slots = exterior_to_slots(cond, method)
    cap, meta = slot_capacity(slots, details=True)
    if details:
        return cap, slots, meta
    return cap
