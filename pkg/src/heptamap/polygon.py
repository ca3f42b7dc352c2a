"""Rectangular heptagons described by a combinatorial type and signed side lengths.

The polygon boundary runs from -inf along a horizontal ray to w_1, through the
vertices w_1..w_6 with w_{s+1} - w_s = i^s H_s, and back to +inf along a second
horizontal ray; the domain lies to the left of this path. Three of the six
finite corners (positions ``sigma``) have interior angle 3 pi / 2.

Optional slits are zero-width spikes at the intruding corners. A slit at corner
sigma_k continues the following side backwards ("next", the default) or the
preceding side forwards ("previous").
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError, ValidationError
from .geometry import (distance_to_polyline, point_segment_distance, segment_hits_any,
                       segments_intersect, winding_number)

SLIT_SIDES = ("next", "previous")


@dataclass(frozen=True)
class PolygonSpec:
    sigma: tuple[int, int, int]
    H: tuple[float, float, float, float, float]
    slits: tuple[float, float, float] | None = None
    slit_side: str = "next"

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(s) for s in self.sigma))
        object.__setattr__(self, "H", tuple(float(h) for h in self.H))
        if self.slits is not None:
            object.__setattr__(self, "slits", tuple(float(t) for t in self.slits))

    @property
    def has_slits(self) -> bool:
        return self.slits is not None and any(t > 0 for t in self.slits)

    def slit_lengths(self) -> np.ndarray:
        return np.zeros(3) if self.slits is None else np.asarray(self.slits, float)

    def to_dict(self) -> dict:
        out = {"sigma": list(self.sigma), "H": list(self.H)}
        if self.slits is not None:
            out["slits"] = list(self.slits)
            if self.slit_side != "next":
                out["slit_side"] = self.slit_side
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PolygonSpec":
        problems = []
        if not isinstance(data, dict):
            raise InputError("polygon description must be a JSON object")
        for key in data:
            if key not in ("sigma", "H", "slits", "slit_side"):
                problems.append(f"unknown field '{key}'")
        sigma = data.get("sigma")
        H = data.get("H")
        if not (isinstance(sigma, list) and len(sigma) == 3 and all(isinstance(s, int) for s in sigma)):
            problems.append("field 'sigma' must be a list of three integers")
        if not (isinstance(H, list) and len(H) == 5 and all(isinstance(h, (int, float)) for h in H)):
            problems.append("field 'H' must be a list of five numbers")
        slits = data.get("slits")
        if slits is not None and not (isinstance(slits, list) and len(slits) == 3
                                      and all(isinstance(t, (int, float)) for t in slits)):
            problems.append("field 'slits' must be a list of three numbers")
        side = data.get("slit_side", "next")
        if side not in SLIT_SIDES:
            problems.append("field 'slit_side' must be 'next' or 'previous'")
        if problems:
            raise InputError("; ".join(problems))
        return cls(tuple(sigma), tuple(H), None if slits is None else tuple(slits), side)

    def checksum(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def sign_polynomial(sigma, s: float) -> float:
    return float(np.prod([s - sj for sj in sigma]))


def expected_sign(sigma, s: int) -> int:
    """Sign that H_s must have: opposite to P_sigma(s + 1/2)."""
    return -1 if sign_polynomial(sigma, s + 0.5) > 0 else 1


def attached_side(spec: PolygonSpec, k: int) -> int:
    """Boundary segment carrying slit k: 0 = left ray, 1..5 = sides, 6 = right ray."""
    return spec.sigma[k] if spec.slit_side == "next" else spec.sigma[k] - 1


def validate(spec: PolygonSpec) -> list[str]:
    """All violations of the admissibility rules; an empty list means valid."""
    out = []
    sigma = spec.sigma
    if len(sigma) != 3 or not (0 <= sigma[0] < sigma[1] < sigma[2] <= 6):
        out.append(f"sigma={sigma} must satisfy 0 <= s1 < s2 < s3 <= 6")
        return out
    H = np.asarray(spec.H, float)
    if H.shape != (5,) or not np.all(np.isfinite(H)):
        out.append("H must hold five finite numbers")
        return out
    slits = spec.slit_lengths()
    if spec.slits is not None:
        if slits.shape != (3,) or not np.all(np.isfinite(slits)) or np.any(slits < 0):
            out.append("slits must be three nonnegative numbers")
            return out
        if spec.slit_side not in SLIT_SIDES:
            out.append("slit_side must be 'next' or 'previous'")
    slit_on = {}
    for k in range(3):
        if slits[k] > 0:
            slit_on[attached_side(spec, k)] = k
    for s in range(1, 6):
        h = H[s - 1]
        p = sign_polynomial(sigma, s + 0.5)
        if h == 0:
            if s not in slit_on:
                out.append(f"degeneracy: H{s}=0 is allowed only with a positive slit along side {s}")
        elif h * p >= 0:
            need = "negative" if p > 0 else "positive"
            out.append(f"sign rule: H{s}={h:g} must be {need} (H_s * P_sigma(s+1/2) < 0)")
    H1, H2, H3, H4, H5 = H
    if sigma == (1, 2, 6) and H4 - H2 <= 0 and not H5 - H3 < 0:
        out.append("degeneracy: sigma=(1,2,6) requires H5-H3<0 when H4-H2<=0")
    if sigma == (1, 5, 6) and H4 - H2 <= 0 and not H1 - H3 > 0:
        out.append("degeneracy: sigma=(1,5,6) requires H1-H3>0 when H4-H2<=0")
    if sigma == (1, 2, 3) and not H5 < H3:
        out.append("degeneracy: sigma=(1,2,3) requires H5<H3")
    if sigma == (4, 5, 6) and not H1 > H3:
        out.append("degeneracy: sigma=(4,5,6) requires H1>H3")
    for k in range(3):
        if slits[k] > 0 and not (0 <= attached_side(spec, k) <= 6):
            out.append(f"slit {k + 1} has no side to attach to")
    return out


def check_valid(spec: PolygonSpec) -> PolygonSpec:
    problems = validate(spec)
    if problems:
        raise ValidationError(problems)
    return spec


def vertices(spec: PolygonSpec) -> np.ndarray:
    """w_1..w_6 with w_1 = 0 and w_{s+1} = w_s + i^s H_s."""
    check_valid(spec)
    return _vertices(spec.H)


def _vertices(H) -> np.ndarray:
    w = [0j]
    for s, h in enumerate(H, start=1):
        w.append(w[-1] + (1j ** s) * h)
    return np.array(w)


def side_lengths_from_vertices(w) -> np.ndarray:
    w = np.asarray(w, complex)
    return np.array([((w[s] - w[s - 1]) / 1j ** s).real for s in range(1, 6)])


def side_direction(spec: PolygonSpec, s: int) -> complex:
    """Unit direction of travel along boundary segment s (0 and 6 are the rays)."""
    if s in (0, 6):
        return 1.0 + 0j
    h = spec.H[s - 1]
    sgn = np.sign(h) if h != 0 else expected_sign(spec.sigma, s)
    return complex((1j ** s) * sgn)


def slit_direction(spec: PolygonSpec, k: int) -> complex:
    s = attached_side(spec, k)
    d = side_direction(spec, s)
    return -d if spec.slit_side == "next" else d


def slit_tips(spec: PolygonSpec) -> np.ndarray:
    w = _vertices(spec.H)
    L = spec.slit_lengths()
    return np.array([w[spec.sigma[k] - 1] + L[k] * slit_direction(spec, k) for k in range(3)])


def mirror(spec: PolygonSpec) -> PolygonSpec:
    """Reflection w -> -conj(w) with relabelled vertices."""
    s1, s2, s3 = spec.sigma
    H = tuple(-h for h in reversed(spec.H))
    slits = None if spec.slits is None else tuple(reversed(spec.slits))
    side = "previous" if spec.slit_side == "next" else "next"
    return PolygonSpec((7 - s3, 7 - s2, 7 - s1), H, slits, side)


def boundary_path(spec: PolygonSpec, ray_length: float | None = None) -> np.ndarray:
    """Boundary polyline from the far left end of the first ray to the far right end of the last."""
    w = _vertices(spec.H)
    L = spec.slit_lengths()
    diam = diameter(spec)
    R = ray_length if ray_length is not None else 1e3 * (diam + 1.0)
    pts = [w[0] - R]
    tips = slit_tips(spec)
    at_corner = {spec.sigma[k]: k for k in range(3) if L[k] > 0}
    for s in range(1, 7):
        if s in at_corner:
            pts += [w[s - 1], tips[at_corner[s]]]
        pts.append(w[s - 1])
    pts.append(w[5] + R)
    clean = [pts[0]]
    for z in pts[1:]:
        if z != clean[-1]:
            clean.append(z)
    return np.array(clean)


def closed_boundary(spec: PolygonSpec, ray_length: float | None = None) -> np.ndarray:
    path = boundary_path(spec, ray_length)
    left, right = path[0], path[-1]
    top = max(path.imag.max(), 0.0) + (right.real - left.real)
    return np.concatenate([path, [right.real + 1j * top, left.real + 1j * top]])


def finite_points(spec: PolygonSpec) -> np.ndarray:
    w = _vertices(spec.H)
    if spec.has_slits:
        w = np.concatenate([w, slit_tips(spec)])
    return w


def diameter(spec: PolygonSpec) -> float:
    p = finite_points(spec)
    return float(np.abs(p[:, None] - p[None, :]).max())


def is_overlapping(spec: PolygonSpec) -> bool:
    """True when two non-adjacent boundary edges meet (self-touching or overlapping image)."""
    path = boundary_path(spec)
    edges = list(zip(path[:-1], path[1:]))
    n = len(edges)
    for i in range(n):
        for j in range(i + 2, n):
            a, b = edges[i]
            c, d = edges[j]
            if j == i + 2 and b == c == edges[i + 1][1] and a == d:
                continue
            if (a == d and b == c):  # the two faces of one slit
                continue
            if segments_intersect(a, b, c, d):
                return True
    return False


def domain_status(spec: PolygonSpec, w) -> int:
    """Winding number of the closed boundary around w (1 inside, 0 outside, >1 overlap)."""
    return winding_number(complex(w), closed_boundary(spec))


def distance_to_boundary(spec: PolygonSpec, w) -> np.ndarray:
    return distance_to_polyline(np.asarray(w, complex), boundary_path(spec))


def distance_to_vertices(spec: PolygonSpec, w) -> np.ndarray:
    p = finite_points(spec)
    return np.abs(np.asarray(w, complex)[..., None] - p).min(axis=-1)


def visible(spec: PolygonSpec, a: complex, b: complex, path=None) -> bool:
    """True when the straight segment a -> b meets no boundary edge."""
    path = boundary_path(spec) if path is None else path
    return not segment_hits_any(complex(a), complex(b), path[:-1], path[1:])


def isthmus_warnings(spec: PolygonSpec, rel: float = 1e-3) -> list[str]:
    """Geometric warning for nearly touching non-adjacent sides."""
    path = boundary_path(spec)
    diam = diameter(spec)
    out = []
    n = len(path) - 1
    for i in range(n):
        for j in range(i + 2, n):
            a, b = path[i], path[i + 1]
            c, d = path[j], path[j + 1]
            dist = min(point_segment_distance(a, np.array([c]), np.array([d]))[0],
                       point_segment_distance(b, np.array([c]), np.array([d]))[0],
                       point_segment_distance(c, np.array([a]), np.array([b]))[0],
                       point_segment_distance(d, np.array([a]), np.array([b]))[0])
            if 0 < dist < rel * diam:
                out.append(f"edges {i} and {j} are {dist:.3g} apart (nearly degenerate isthmus)")
    return out
