"""File formats: polygon, parameter and condenser JSON, batch and streamline CSV, SVG.

Every written file carries the tool version and the checksum of its input.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

from . import __version__
from .capacity import CondenserSpec
from .exceptions import InputError
from .params import AuxParams
from .polygon import PolygonSpec, boundary_path, diameter, finite_points, is_overlapping


def checksum_of(data) -> str:
    blob = json.dumps(data, sort_keys=True, default=float).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _read_json(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _write_json(path, data):
    text = json.dumps(data, indent=2) + "\n"
    if path is None or str(path) == "-":
        return text
    Path(path).write_text(text)
    return text


def read_polygon(path) -> PolygonSpec:
    data = _read_json(path)
    try:
        return PolygonSpec.from_dict(data)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def read_condenser(path) -> CondenserSpec:
    data = _read_json(path)
    try:
        return CondenserSpec.from_dict(data)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def params_document(params: AuxParams, spec: PolygonSpec) -> dict:
    doc = params.to_dict()
    doc["polygon"] = spec.to_dict()
    doc["polygon_checksum"] = spec.checksum()
    doc["overlapping"] = is_overlapping(spec)
    doc["iterations"] = int(params.iterations)
    doc["tool_version"] = __version__
    return doc


def write_params(path, params: AuxParams, spec: PolygonSpec) -> str:
    return _write_json(path, params_document(params, spec))


def read_params(path):
    """(AuxParams, PolygonSpec or None, checksum of the parameter document)."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise InputError(f"{path}: parameter file must hold a JSON object")
    params = AuxParams.from_dict(doc)
    spec = None
    if "polygon" in doc:
        spec = PolygonSpec.from_dict(doc["polygon"])
    return params, spec, params_checksum(doc)


def params_checksum(doc: dict) -> str:
    keys = ("omega", "u0", "c", "c1", "c2", "h", "zeros", "polygon")
    return checksum_of({k: doc[k] for k in keys if k in doc})


# ------------------------------------------------------------------ CSV


def format_complex(z: complex) -> str:
    return f"{z.real:.17g},{z.imag:.17g}"


def parse_complex(text: str) -> complex:
    parts = text.replace(" ", "").split(",")
    if len(parts) != 2:
        raise InputError(f"expected 're,im', got '{text}'")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise InputError(f"expected 're,im' with numbers, got '{text}'") from None


def read_points_csv(path) -> list[complex]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    pts = []
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        fields = [f.strip() for f in s.split(",")]
        try:
            pts.append(complex(float(fields[0]), float(fields[1])))
        except (ValueError, IndexError):
            if not pts and lineno == 1:
                continue  # header row
            raise InputError(f"{path}, line {lineno}: expected 're,im'") from None
    return pts


def batch_csv(points_out, statuses, direction: str, checksum: str) -> str:
    buf = io.StringIO()
    buf.write(f"# heptamap {__version__} direction={direction} params={checksum}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re", "im", "status"])
    for z, st in zip(points_out, statuses):
        if z is None:
            w.writerow(["nan", "nan", st])
        else:
            w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", st])
    return buf.getvalue()


def streamlines_csv(lines, checksum: str) -> str:
    buf = io.StringIO()
    buf.write(f"# heptamap {__version__} polygon={checksum}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "index", "re", "im"])
    for sl in lines:
        for i, z in enumerate(sl.w):
            w.writerow([f"{sl.level:.17g}", i, f"{z.real:.17g}", f"{z.imag:.17g}"])
    return buf.getvalue()


# ------------------------------------------------------------------ SVG


def streamlines_svg(spec: PolygonSpec, lines, checksum: str, width: int = 800) -> str:
    """One path per level plus the polygon boundary as a closed path."""
    pts = finite_points(spec)
    diam = max(diameter(spec), 1e-9)
    lo_x, hi_x = pts.real.min() - 1.5 * diam, pts.real.max() + 1.5 * diam
    top = max(pts.imag.max(), max((sl.w.imag.max() for sl in lines if len(sl.w)), default=0.0))
    lo_y, hi_y = pts.imag.min() - 0.1 * diam, top + 0.1 * diam
    height = int(width * (hi_y - lo_y) / (hi_x - lo_x)) + 1
    sx = width / (hi_x - lo_x)

    def xy(z):
        return f"{(z.real - lo_x) * sx:.3f},{(hi_y - z.imag) * sx:.3f}"

    path = boundary_path(spec, ray_length=2 * diam)
    closed = list(path) + [complex(path[-1].real, lo_y), complex(path[0].real, lo_y)]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f"<!-- heptamap {__version__} polygon={checksum} -->",
           '<path class="boundary" fill="#dddddd" stroke="black" stroke-width="1.5" d="M '
           + " L ".join(xy(z) for z in closed) + ' Z"/>']
    for sl in lines:
        w = sl.w
        out.append(f'<path class="streamline" data-level="{sl.level:g}" fill="none" stroke="#1f5fa8" '
                   f'stroke-width="1" d="M ' + " L ".join(xy(z) for z in w) + '"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def capacity_document(cond: CondenserSpec, capacity: float, slots, meta: dict) -> dict:
    return {
        "capacity": float(capacity),
        "slots": slots.intervals.tolist(),
        "scale": float(slots.scale),
        "offset": float(slots.offset),
        "route": slots.info.get("route"),
        "map_residual": slots.info.get("residual"),
        "nodes_per_slot": int(meta["nodes_per_slot"]),
        "relative_change": float(meta["relative_change"]),
        "condenser_checksum": cond.checksum(),
        "tool_version": __version__,
    }
