"""Planar helpers on polylines stored as complex arrays."""
from __future__ import annotations

import numpy as np


def point_segment_distance(p, a, b):
    """Distance from points p (any shape) to the segments [a_k, b_k]; returns shape p.shape + (K,)."""
    p = np.asarray(p, complex)[..., None]
    a = np.asarray(a, complex)
    b = np.asarray(b, complex)
    d = b - a
    dd = np.abs(d) ** 2
    t = np.where(dd > 0, ((p - a) * np.conj(d)).real / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.abs(p - (a + t * d))


def distance_to_polyline(p, pts):
    pts = np.asarray(pts, complex)
    return point_segment_distance(p, pts[:-1], pts[1:]).min(axis=-1)


def _cross(u, v):
    return (np.conj(u) * v).imag


def segments_intersect(p1, p2, q1, q2, eps=1e-12):
    """Closed-segment intersection test, tolerant to collinear overlap."""
    scale = max(abs(p1), abs(p2), abs(q1), abs(q2), 1.0) * eps
    d1 = _cross(p2 - p1, q1 - p1)
    d2 = _cross(p2 - p1, q2 - p1)
    d3 = _cross(q2 - q1, p1 - q1)
    d4 = _cross(q2 - q1, p2 - q1)
    s = lambda v: 0 if abs(v) <= scale * max(abs(p2 - p1), abs(q2 - q1), 1.0) else (1 if v > 0 else -1)
    o1, o2, o3, o4 = s(d1), s(d2), s(d3), s(d4)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True

    def on_seg(a, b, c):
        return (min(a.real, b.real) - scale <= c.real <= max(a.real, b.real) + scale
                and min(a.imag, b.imag) - scale <= c.imag <= max(a.imag, b.imag) + scale)

    if o1 == 0 and on_seg(p1, p2, q1):
        return True
    if o2 == 0 and on_seg(p1, p2, q2):
        return True
    if o3 == 0 and on_seg(q1, q2, p1):
        return True
    if o4 == 0 and on_seg(q1, q2, p2):
        return True
    return False


def segment_hits_any(p, q, a, b):
    """True when the open segment (p, q) properly crosses or touches any edge [a_k, b_k]."""
    a = np.asarray(a, complex)
    b = np.asarray(b, complex)
    r = q - p
    s = b - a
    denom = _cross(r, s)
    ap = a - p
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(ap, s) / denom
        u = _cross(ap, r) / denom
    hit = (np.abs(denom) > 0) & (t > 0) & (t < 1) & (u >= 0) & (u <= 1)
    if hit.any():
        return True
    # parallel edges lying on the segment
    par = np.abs(denom) <= 1e-15 * np.abs(r) * np.maximum(np.abs(s), 1e-300)
    if par.any():
        dist = np.abs(_cross(r, ap[par])) / max(abs(r), 1e-300)
        close = dist <= 1e-12 * max(abs(r), 1.0)
        if close.any():
            for aa, bb in zip(a[par][close], b[par][close]):
                ta = ((aa - p) * np.conj(r)).real / abs(r) ** 2
                tb = ((bb - p) * np.conj(r)).real / abs(r) ** 2
                lo, hi = min(ta, tb), max(ta, tb)
                if hi > 0 and lo < 1:
                    return True
    return False


def winding_number(p, closed_pts) -> int:
    """Winding number of the closed polyline around p (last point joins the first)."""
    pts = np.asarray(closed_pts, complex)
    z = pts - p
    if np.any(z == 0):
        raise ValueError("winding number is undefined at a polyline vertex")
    z2 = np.roll(z, -1)
    ang = np.angle(z2 / z)
    return int(np.round(ang.sum() / (2 * np.pi)))


def polylines_cross(a, b) -> bool:
    """True when two polylines share any point (closed segments)."""
    a = np.asarray(a, complex)
    b = np.asarray(b, complex)
    if len(a) < 2 or len(b) < 2:
        return False
    # bounding-box prefilter per segment pair, vectorised
    a0, a1 = a[:-1], a[1:]
    b0, b1 = b[:-1], b[1:]
    axlo = np.minimum(a0.real, a1.real)[:, None]
    axhi = np.maximum(a0.real, a1.real)[:, None]
    aylo = np.minimum(a0.imag, a1.imag)[:, None]
    ayhi = np.maximum(a0.imag, a1.imag)[:, None]
    bxlo = np.minimum(b0.real, b1.real)[None, :]
    bxhi = np.maximum(b0.real, b1.real)[None, :]
    bylo = np.minimum(b0.imag, b1.imag)[None, :]
    byhi = np.maximum(b0.imag, b1.imag)[None, :]
    cand = (axlo <= bxhi) & (bxlo <= axhi) & (aylo <= byhi) & (bylo <= ayhi)
    ii, jj = np.nonzero(cand)
    if len(ii) == 0:
        return False
    r = (a1 - a0)[ii]
    s = (b1 - b0)[jj]
    qp = (b0[jj] - a0[ii])
    den = _cross(r, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = _cross(qp, s) / den
        u = _cross(qp, r) / den
    proper = (den != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
    if proper.any():
        return True
    colin = (den == 0) & (_cross(qp, r) == 0)
    return bool(colin.any())


def hausdorff_one_sided(points, polyline):
    """max over points of the distance to the polyline."""
    return float(distance_to_polyline(np.asarray(points, complex), polyline).max())
