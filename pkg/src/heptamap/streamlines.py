"""Ideal-flow streamlines over a rectangular landscape.

Uniform flow over the flat upper half-plane has the horizontal lines
Im x = t as streamlines; the inverse map carries them into the polygon.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import ConvergenceError, DomainError, InputError
from .mapping import MapContext

log = logging.getLogger(__name__)

MAX_DROP_FRACTION = 0.1
REFINE_FRACTION = 0.01


@dataclass
class Streamline:
    level: float
    x: np.ndarray  # sample points in the upper half-plane
    w: np.ndarray  # their images in the polygon
    dropped: int = 0


def sample_abscissae(ctx: MapContext, x_range: float, samples: int) -> np.ndarray:
    """Real parts: sinh-spaced around the branch points plus geometric clusters at each of them."""
    xs = ctx.branch_x
    mid = 0.5 * (xs.min() + xs.max())
    r0 = max(xs.max() - xs.min(), 1e-3)
    tau = np.linspace(-np.arcsinh((x_range + mid) / r0), np.arcsinh((x_range - mid) / r0), samples)
    pts = [mid + r0 * np.sinh(tau)]
    gaps = np.diff(np.sort(xs))
    for i, s in enumerate(np.sort(xs)):
        near = min(gaps[i - 1] if i > 0 else r0, gaps[i] if i < len(gaps) else r0)
        pts.append(s + 0.5 * near * np.geomspace(1e-3, 1, 8))
        pts.append(s - 0.5 * near * np.geomspace(1e-3, 1, 8))
        pts.append([s])
    x = np.unique(np.clip(np.concatenate(pts), -x_range, x_range))
    return x


def _refine_threshold(ctx: MapContext, w_a, w_b):
    # far out the map is nearly linear; keep the gap relative to the distance from the polygon
    centre = ctx._points.mean()
    d = max(ctx.diameter, 0.5 * abs(w_a + w_b - 2 * centre))
    return REFINE_FRACTION * d


class _LevelTracer:
    def __init__(self, ctx: MapContext, level: float):
        self.ctx = ctx
        self.level = level
        self.prev = None  # (x, u)

    def solve(self, x: complex):
        ctx = self.ctx
        if self.level > 0 and self.prev is not None:
            xp, up = self.prev
            try:
                if abs(x) > ctx.far_radius and abs(xp) > ctx.far_radius:
                    u = ctx._track(up, 1 / xp, 1 / x, "q", 1 / ctx.branch_x[ctx.branch_x != 0])
                elif abs(x) <= ctx.far_radius and abs(xp) <= ctx.far_radius:
                    u = ctx._track(up, xp, x, "x", ctx.branch_x)
                else:
                    u = ctx.inverse_u(x)
            except (ConvergenceError, DomainError):
                u = ctx.inverse_u(x)
        else:
            u = ctx.inverse_u(x)
        self.prev = (x, u)
        return u


def streamline(ctx: MapContext, level: float, x_range: float = 10.0, samples: int = 64,
               max_refine: int = 12) -> Streamline:
    if level < 0 or not np.isfinite(level):
        raise InputError("streamline levels must be nonnegative")
    if samples < 16:
        raise InputError("at least 16 samples per streamline are required")
    xr = sample_abscissae(ctx, x_range, samples)
    tracer = _LevelTracer(ctx, level)
    xs, ws, dropped = [], [], 0

    def image(x):
        nonlocal dropped
        try:
            return complex(ctx.w_of_u(tracer.solve(x)))
        except (ConvergenceError, DomainError) as exc:
            log.debug("streamline point %s dropped: %s", x, exc)
            dropped += 1
            tracer.prev = None
            return None

    for xr_i in xr:
        x = complex(xr_i, level)
        w = image(x)
        if w is None:
            continue
        # bisect the parameter interval until the image gap is small
        if xs:
            stack = [(xs[-1], ws[-1], x, w, 0)]
            out = []
            while stack:
                xa, wa, xb, wb, depth = stack.pop()
                if abs(wb - wa) <= _refine_threshold(ctx, wa, wb) or depth >= max_refine:
                    out.append((xb, wb))
                    continue
                xm = 0.5 * (xa + xb)
                wm = image(xm)
                if wm is None:
                    out.append((xb, wb))
                    continue
                stack.append((xm, wm, xb, wb, depth + 1))
                stack.append((xa, wa, xm, wm, depth + 1))
            for xo, wo in out:
                xs.append(xo)
                ws.append(wo)
        else:
            xs.append(x)
            ws.append(w)
    total = len(xs) + dropped
    if dropped > MAX_DROP_FRACTION * total:
        raise ConvergenceError(f"streamline at level {level:g}: {dropped} of {total} points failed")
    if dropped:
        log.warning("streamline at level %g: dropped %d of %d points", level, dropped, total)
    return Streamline(float(level), np.array(xs), np.array(ws), dropped)


def streamlines(ctx: MapContext, levels, x_range: float = 10.0, samples: int = 64) -> list[Streamline]:
    """One polyline per level, ordered by level."""
    levels = sorted(float(t) for t in levels)
    if not levels:
        raise InputError("at least one streamline level is required")
    return [streamline(ctx, t, x_range, samples) for t in levels]


def far_field_height(ctx: MapContext, x: complex) -> float:
    """Predicted Im w for large |x|: A' Im x + h (pi - arg x), from w = A' x - h log x + C."""
    A = ctx.asymptotic_scale()
    h = ctx.params.h
    return float(A * x.imag + h * (np.pi - np.angle(x)))
