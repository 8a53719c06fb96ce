"""Readers and writers for the on-disk formats, plus a deterministic JSON writer."""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import IndicatrixError, SchemaError
from .indicatrix import SampledMapping, sampled_mapping
from .metric_space import PointCloudSpace, build_point_cloud
from .variation import Sampled1DFunction

log = logging.getLogger(__name__)


def file_sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise SchemaError(f"cannot write non-finite number {x} as JSON")
    text = format(x, ".17g")
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return "null" if obj is None else ("true" if obj else "false")
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (set, frozenset)):
        obj = sorted(obj)
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        parts = [_encode(v, indent, level + 1) for v in obj]
        if all(not isinstance(v, (dict, list, tuple, np.ndarray, set, frozenset)) for v in obj):
            return "[" + ", ".join(parts) + "]"
        return "[\n" + ",\n".join(inner + p for p in parts) + "\n" + pad + "]"
    raise SchemaError(f"cannot write {type(obj).__name__} as JSON")


def dumps(obj: Any, indent: int = 2) -> str:
    """JSON text with insertion-ordered keys and floats at 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def _read_csv_rows(path: str | Path) -> tuple[list[str] | None, list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [[c.strip() for c in row] for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not rows:
        raise SchemaError(f"{path}: empty CSV file")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.lower() for c in rows[0]], rows[1:]
    return header, rows


def read_point_cloud(path: str | Path) -> PointCloudSpace:
    """Load a ``.csv`` (``id, coord_1..coord_d[, weight]``) or ``.json`` point cloud."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _point_cloud_from_csv(path)
    return point_cloud_from_dict(read_json(path), source=str(path))


def _point_cloud_from_csv(path: Path) -> PointCloudSpace:
    header, rows = _read_csv_rows(path)
    if not rows:
        raise SchemaError(f"{path}: no point rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows) or width < 2:
        raise SchemaError(f"{path}: every row needs an id and the same number of coordinates")
    try:
        table = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric entry ({exc})") from exc
    has_weight = header is not None and header[-1] in ("weight", "w", "mass")
    ids = table[:, 0]
    if np.any(ids != np.round(ids)) or sorted(ids.astype(int)) != list(range(len(ids))):
        raise SchemaError(f"{path}: ids must be the integers 0..n-1")
    table = table[np.argsort(ids, kind="stable")]
    coords = table[:, 1:-1] if has_weight else table[:, 1:]
    if coords.shape[1] == 0:
        raise SchemaError(f"{path}: rows have no coordinates")
    weights = table[:, -1] if has_weight else None
    return _built(build_point_cloud(coords, weights, "euclidean"), source=str(path))


def point_cloud_from_dict(payload: Any, source: str = "<payload>") -> PointCloudSpace:
    if not isinstance(payload, dict) or "points" not in payload:
        raise SchemaError(f"{source}: point cloud JSON needs a 'points' key")
    metric = payload.get("metric", "euclidean")
    weights = payload.get("weights")
    try:
        if isinstance(metric, dict):
            if "matrix" not in metric:
                raise SchemaError(f"{source}: metric object must hold a 'matrix'")
            matrix = np.asarray(metric["matrix"], dtype=float)
            if len(payload["points"]) != matrix.shape[0]:
                raise SchemaError(f"{source}: {len(payload['points'])} points but a {matrix.shape[0]}-row matrix")
            space = build_point_cloud(matrix, weights, "matrix")
        else:
            space = build_point_cloud(np.asarray(payload["points"], dtype=float), weights, str(metric))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, IndicatrixError):
            raise
        raise SchemaError(f"{source}: malformed point cloud ({exc})") from exc
    return _built(space, source)


def _built(space: PointCloudSpace, source: str) -> PointCloudSpace:
    merged = sum(len(g) - 1 for g in space.origin)
    if merged:
        log.warning("%s: merged %d duplicate point(s); ids were renumbered", source, merged)
    return space


def point_cloud_to_dict(space: PointCloudSpace) -> dict[str, Any]:
    if space.coords is None:
        return {
            "points": list(range(space.n)),
            "weights": space.weights.tolist(),
            "metric": {"matrix": space.dist.tolist()},
        }
    return {"points": space.coords.tolist(), "weights": space.weights.tolist(), "metric": space.metric}


def write_point_cloud(space: PointCloudSpace, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() != ".csv":
        write_json(point_cloud_to_dict(space), path)
        return
    if space.coords is None or space.metric != "euclidean":
        raise SchemaError("CSV point clouds carry euclidean coordinates only; use JSON")
    d = space.coords.shape[1]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"coord_{j + 1}" for j in range(d)] + ["weight"])
        for i in range(space.n):
            w.writerow([i] + [_format_float(v) for v in space.coords[i]] + [_format_float(space.weights[i])])


def read_mapping(path: str | Path, space: PointCloudSpace) -> SampledMapping:
    """``{"values": [...], "defined": [...], "codomain": ...}``; ``null`` values mean undefined."""
    payload = read_json(path)
    if isinstance(payload, list):
        payload = {"values": payload}
    if not isinstance(payload, dict) or "values" not in payload:
        raise SchemaError(f"{path}: mapping JSON needs a 'values' list")
    return sampled_mapping(space, payload["values"], payload.get("defined"), payload.get("codomain"))


def mapping_to_dict(f: SampledMapping) -> dict[str, Any]:
    return {
        "values": [to_plain(f.value(i)) for i in range(f.domain.n)],
        "defined": f.defined.tolist(),
        "codomain": f.codomain,
    }


def to_plain(v):
    """Codomain value as written to JSON: scalars for 1-D points, lists otherwise."""
    if isinstance(v, tuple):
        return v[0] if len(v) == 1 else [to_plain(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


def read_ids(path: str | Path) -> list[int]:
    """Point ids from a JSON list, ``{"ids": [...]}``, or whitespace/comma separated text."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError:
        payload = text.replace(",", " ").split()
    if isinstance(payload, dict):
        payload = payload.get("ids")
    if not isinstance(payload, list):
        raise SchemaError(f"{path}: expected a list of point ids")
    try:
        return [int(v) for v in payload]
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: ids must be integers ({exc})") from exc


def read_y_grid(path: str | Path) -> list:
    payload = read_json(path)
    if isinstance(payload, dict):
        payload = payload.get("y")
    if not isinstance(payload, list):
        raise SchemaError(f"{path}: expected a JSON list of codomain points")
    return [tuple(v) if isinstance(v, list) else v for v in payload]


def read_schedule(path: str | Path) -> list[tuple[float, float]]:
    payload = read_json(path)
    if not isinstance(payload, list):
        raise SchemaError(f"{path}: schedule must be a JSON list of {{'r': ..., 'eps': ...}}")
    try:
        return [(float(s["r"]), float(s["eps"])) for s in payload]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed schedule entry ({exc!r})") from exc


def read_samples(path: str | Path) -> Sampled1DFunction:
    """Two-column CSV of ``x, y`` samples, header optional."""
    _, rows = _read_csv_rows(path)
    try:
        table = np.array([[float(c) for c in r[:2]] for r in rows])
    except ValueError as exc:
        raise SchemaError(f"{path}: non-numeric sample ({exc})") from exc
    if table.ndim != 2 or table.shape[1] != 2:
        raise SchemaError(f"{path}: expected x,y columns")
    return Sampled1DFunction(table[:, 0], table[:, 1])
