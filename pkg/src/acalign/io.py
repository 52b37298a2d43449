"""File formats: pattern/field JSON, detection JSON, manifests, CSV import.

All numeric JSON is emitted with 12 significant digits.  Serialization
is byte-deterministic so the CLI, the in-process pipeline and the HTTP
service produce identical output for identical input.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from typing import Any, Iterable

import numpy as np

from .dots import DotPattern
from .gabor import GaborField
from .stimuli import StimulusRecord, StimulusSpec, Truth, round_sig


class SchemaError(ValueError):
    """Raised when an input file violates the expected schema."""


def _round_tree(obj):
    if isinstance(obj, float):
        return round_sig(obj)
    if isinstance(obj, (np.floating,)):
        return round_sig(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_tree(v) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON text with 12-significant-digit floats."""
    return json.dumps(_round_tree(obj), separators=(", ", ": "), indent=1)


def dump_bytes(obj: Any) -> bytes:
    return (dumps(obj) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Patterns and fields


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def _parse_domain(data: dict) -> tuple[float, float]:
    _require(isinstance(data, dict), "document: expected a JSON object")
    dom = data.get("domain")
    _require(isinstance(dom, dict), "domain: missing or not an object")
    for key in ("width", "height"):
        _require(isinstance(dom.get(key), (int, float)),
                 f"domain.{key}: missing or not a number")
        _require(dom[key] > 0, f"domain.{key}: must be positive")
    return float(dom["width"]), float(dom["height"])


def pattern_to_dict(pattern: DotPattern) -> dict:
    return {
        "domain": {"width": pattern.width, "height": pattern.height},
        "points": [[float(x), float(y)] for x, y in pattern.points],
    }


def field_to_dict(field: GaborField) -> dict:
    return {
        "domain": {"width": field.width, "height": field.height},
        "elements": [
            {"x": float(x), "y": float(y), "theta": float(t)}
            for (x, y), t in zip(field.xy, field.theta)
        ],
    }


def pattern_from_dict(data: dict) -> DotPattern:
    w, h = _parse_domain(data)
    points = data.get("points")
    _require(isinstance(points, list), "points: missing or not a list")
    _require(len(points) >= 2, "points: at least 2 required")
    pts = []
    for k, row in enumerate(points):
        _require(isinstance(row, (list, tuple)) and len(row) == 2
                 and all(isinstance(v, (int, float)) for v in row),
                 f"points[{k}]: expected [x, y] numbers")
        _require(0 <= row[0] <= w and 0 <= row[1] <= h,
                 f"points[{k}]: outside the domain")
        pts.append([float(row[0]), float(row[1])])
    return DotPattern(w, h, np.array(pts))


def field_from_dict(data: dict) -> GaborField:
    w, h = _parse_domain(data)
    elements = data.get("elements")
    _require(isinstance(elements, list), "elements: missing or not a list")
    _require(len(elements) >= 2, "elements: at least 2 required")
    xy, theta = [], []
    for k, el in enumerate(elements):
        _require(isinstance(el, dict), f"elements[{k}]: expected an object")
        for key in ("x", "y", "theta"):
            _require(isinstance(el.get(key), (int, float)),
                     f"elements[{k}].{key}: missing or not a number")
        _require(0 <= el["x"] <= w and 0 <= el["y"] <= h,
                 f"elements[{k}]: outside the domain")
        _require(0 <= el["theta"] < math.pi + 1e-12,
                 f"elements[{k}].theta: must be in [0, pi)")
        xy.append([float(el["x"]), float(el["y"])])
        theta.append(float(el["theta"]))
    return GaborField(w, h, np.array(xy), np.array(theta))


def load_document(path) -> DotPattern | GaborField:
    """Load a pattern file, dispatching on its "points"/"elements" key."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"document: invalid JSON ({exc})") from exc
    return parse_document(data)


def parse_document(data: dict) -> DotPattern | GaborField:
    _require(isinstance(data, dict), "document: expected a JSON object")
    if "points" in data:
        return pattern_from_dict(data)
    if "elements" in data:
        return field_from_dict(data)
    raise SchemaError("document: needs either a 'points' or an 'elements' list")


def load_csv_points(path) -> tuple[np.ndarray, np.ndarray | None]:
    """GERT-style export: one `x,y[,theta]` line per element."""
    xs, thetas = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            _require(len(parts) in (2, 3), f"line {lineno}: expected x,y[,theta]")
            try:
                values = [float(p) for p in parts]
            except ValueError as exc:
                raise SchemaError(f"line {lineno}: non-numeric value") from exc
            xs.append(values[:2])
            thetas.append(values[2] if len(values) == 3 else None)
    _require(len(xs) >= 2, "csv: at least 2 rows required")
    has_theta = all(t is not None for t in thetas)
    return np.array(xs), (np.array(thetas, dtype=float) if has_theta else None)


# ---------------------------------------------------------------------------
# Detections


def detection_to_dict(det) -> dict:
    return {
        "rect": {
            "ax": det.ax, "ay": det.ay, "bx": det.bx, "by": det.by,
            "width": det.width,
        },
        "log10_nfa": det.log_nfa,
        "members": list(det.members),
    }


def detections_to_bytes(detections: Iterable) -> bytes:
    return dump_bytes([detection_to_dict(d) for d in detections])


# ---------------------------------------------------------------------------
# Stimulus records / manifests


def record_to_dict(record: StimulusRecord) -> dict:
    out = {
        "spec": asdict(record.spec),
        "field": field_to_dict(record.field),
    }
    if record.truth is not None:
        out["truth"] = {
            "x1": record.truth.x1, "y1": record.truth.y1,
            "x2": record.truth.x2, "y2": record.truth.y2,
            "members": list(record.truth.members),
        }
    return out


def record_from_dict(data: dict) -> StimulusRecord:
    _require(isinstance(data, dict) and "spec" in data and "field" in data,
             "record: needs 'spec' and 'field'")
    spec_data = dict(data["spec"])
    spec = StimulusSpec(**spec_data)
    field = field_from_dict(data["field"])
    truth = None
    if data.get("truth") is not None:
        t = data["truth"]
        truth = Truth(x1=float(t["x1"]), y1=float(t["y1"]),
                      x2=float(t["x2"]), y2=float(t["y2"]),
                      members=tuple(int(m) for m in t["members"]))
    return StimulusRecord(spec=spec, field=field, truth=truth)


def write_manifest(path, records: Iterable[StimulusRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(_round_tree(record_to_dict(rec)),
                                separators=(",", ":")) + "\n")


def read_manifest(path):
    """Yields (line_number, StimulusRecord | SchemaError) pairs."""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, record_from_dict(json.loads(line))
            except (json.JSONDecodeError, SchemaError, TypeError, KeyError,
                    ValueError) as exc:
                yield lineno, SchemaError(f"line {lineno}: {exc}")
