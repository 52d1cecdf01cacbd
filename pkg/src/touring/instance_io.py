"""JSON instance and result files.

Instance document::

    {
      "dimension": 2,
      "start": [0, 0],
      "end": [8, 0],
      "eps": 0.1,                      # optional default accuracy
      "disjoint": true,
      "regions": [
        {"type": "ball", "center": [1, 1], "radius": 1,
         "fat": {"r_h": 1, "fatness_bound": 1}},      # fat is optional
        {"type": "box", "min": [0, 0], "max": [1, 1]},
        {"type": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]},
        {"type": "segment", "a": [-1, 0], "b": [1, 0]},
        {"type": "union", "parts": [{"type": "ball", ...}, ...]}
      ]
    }

Result document: ``tour`` (list of points), ``length`` and optionally
``lower_bound``, ``ratio``, ``candidates``, ``wall_time``, ``algorithm``,
``eps``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .geometry import (Ball, Box, ConvexPolygon, FatMeta, GeometryError, Instance, Region,
                       Segment, Tour, Union)


class InstanceFormatError(ValueError):
    """Malformed instance or result document; ``location`` says where."""

    def __init__(self, message: str, location: str = ""):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


# ---------------------------------------------------------------------------
# parsing


def _need(obj: Dict[str, Any], key: str, where: str):
    if not isinstance(obj, dict):
        raise InstanceFormatError("expected an object", where)
    if key not in obj:
        raise InstanceFormatError(f"missing field {key!r}", where)
    return obj[key]


def _point(value, where: str, d: Optional[int]) -> List[float]:
    if not isinstance(value, list) or not value:
        raise InstanceFormatError("expected a non-empty list of numbers", where)
    out = []
    for k, x in enumerate(value):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise InstanceFormatError("expected a number", f"{where}[{k}]")
        out.append(float(x))
    if not np.all(np.isfinite(out)):
        raise InstanceFormatError("coordinates must be finite", where)
    if d is not None and len(out) != d:
        raise InstanceFormatError(f"expected {d} coordinates, got {len(out)}", where)
    return out


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError("expected a number", where)
    return float(value)


def _region(obj, where: str, d: int, allow_union: bool = True) -> Region:
    kind = _need(obj, "type", where)
    try:
        if kind == "ball":
            return Ball(_point(_need(obj, "center", where), f"{where}.center", d),
                        _number(_need(obj, "radius", where), f"{where}.radius"))
        if kind == "box":
            return Box(_point(_need(obj, "min", where), f"{where}.min", d),
                       _point(_need(obj, "max", where), f"{where}.max", d))
        if kind == "polygon":
            verts = _need(obj, "vertices", where)
            if not isinstance(verts, list):
                raise InstanceFormatError("expected a list of points", f"{where}.vertices")
            if d != 2:
                raise InstanceFormatError("polygons need dimension 2", where)
            return ConvexPolygon(tuple(_point(v, f"{where}.vertices[{k}]", 2)
                                       for k, v in enumerate(verts)))
        if kind == "segment":
            return Segment(_point(_need(obj, "a", where), f"{where}.a", d),
                           _point(_need(obj, "b", where), f"{where}.b", d))
        if kind == "union":
            if not allow_union:
                raise InstanceFormatError("unions cannot be nested", where)
            parts = _need(obj, "parts", where)
            if not isinstance(parts, list) or not parts:
                raise InstanceFormatError("expected a non-empty list of parts", f"{where}.parts")
            return Union(tuple(_region(p, f"{where}.parts[{k}]", d, False)
                               for k, p in enumerate(parts)))
    except GeometryError as exc:
        raise InstanceFormatError(str(exc), where) from exc
    raise InstanceFormatError(f"unknown region type {kind!r}", f"{where}.type")


def instance_from_dict(doc: Dict[str, Any]) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("expected a JSON object at top level", "$")
    d = _need(doc, "dimension", "$")
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise InstanceFormatError("dimension must be a positive integer", "$.dimension")
    start = _point(_need(doc, "start", "$"), "$.start", d)
    end = _point(_need(doc, "end", "$"), "$.end", d)
    regs = doc.get("regions", [])
    if not isinstance(regs, list):
        raise InstanceFormatError("expected a list", "$.regions")
    regions, fat = [], []
    for k, obj in enumerate(regs):
        where = f"$.regions[{k}]"
        regions.append(_region(obj, where, d))
        meta = obj.get("fat")
        if meta is None:
            fat.append(None)
        else:
            try:
                fat.append(FatMeta(_number(_need(meta, "r_h", f"{where}.fat"), f"{where}.fat.r_h"),
                                   _number(_need(meta, "fatness_bound", f"{where}.fat"),
                                           f"{where}.fat.fatness_bound")))
            except GeometryError as exc:
                raise InstanceFormatError(str(exc), f"{where}.fat") from exc
    disjoint = doc.get("disjoint", False)
    if not isinstance(disjoint, bool):
        raise InstanceFormatError("expected true or false", "$.disjoint")
    eps = doc.get("eps")
    if eps is not None:
        eps = _number(eps, "$.eps")
        if not 0 < eps <= 1:
            raise InstanceFormatError("eps must be in (0, 1]", "$.eps")
    return Instance(start, end, tuple(regions), tuple(fat), disjoint, eps)


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc
    return instance_from_dict(doc)


def read_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


# ---------------------------------------------------------------------------
# writing


def _coords(p) -> List[float]:
    return [float(x) for x in p]


def region_to_dict(region: Region) -> Dict[str, Any]:
    if isinstance(region, Ball):
        return {"type": "ball", "center": _coords(region.center), "radius": region.radius}
    if isinstance(region, Box):
        return {"type": "box", "min": _coords(region.lo), "max": _coords(region.hi)}
    if isinstance(region, ConvexPolygon):
        return {"type": "polygon", "vertices": [_coords(v) for v in region.vertices]}
    if isinstance(region, Segment):
        return {"type": "segment", "a": _coords(region.a), "b": _coords(region.b)}
    if isinstance(region, Union):
        return {"type": "union", "parts": [region_to_dict(p) for p in region.parts]}
    raise GeometryError(f"cannot serialize {type(region).__name__}")


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    regions = []
    for region, meta in zip(instance.regions, instance.fat):
        obj = region_to_dict(region)
        if meta is not None:
            obj["fat"] = {"r_h": meta.r_h, "fatness_bound": meta.fatness_bound}
        regions.append(obj)
    doc = {"dimension": instance.dim, "start": _coords(instance.start),
           "end": _coords(instance.end)}
    if instance.eps is not None:
        doc["eps"] = instance.eps
    doc["disjoint"] = instance.disjoint
    doc["regions"] = regions
    return doc


_NUMBER_LIST = re.compile(r"\[\s*([-+0-9eE.,\s]+?)\s*\]")


def _dumps(doc: Dict[str, Any]) -> str:
    """Indented JSON with each coordinate list kept on one line."""
    text = json.dumps(doc, indent=1)
    text = _NUMBER_LIST.sub(lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]",
                            text)
    return text + "\n"


def format_instance(instance: Instance) -> str:
    return _dumps(instance_to_dict(instance))


def write_instance(instance: Instance, path) -> None:
    Path(path).write_text(format_instance(instance))


# ---------------------------------------------------------------------------
# results


@dataclass
class ResultFile:
    tour: np.ndarray
    length: float
    lower_bound: Optional[float] = None
    ratio: Optional[float] = None
    candidates: List[int] = field(default_factory=list)
    wall_time: Optional[float] = None
    algorithm: Optional[str] = None
    eps: Optional[float] = None

    def __post_init__(self):
        if self.lower_bound is not None and self.length < self.lower_bound - 1e-9 * max(1.0, self.length):
            raise InstanceFormatError("length is below the lower bound", "$.length")

    def to_tour(self) -> Tour:
        return Tour(np.asarray(self.tour, dtype=float), self.length)


def result_to_dict(res: ResultFile) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"tour": [_coords(p) for p in res.tour], "length": res.length}
    for key in ("lower_bound", "ratio", "wall_time", "algorithm", "eps"):
        value = getattr(res, key)
        if value is not None:
            doc[key] = value
    doc["candidates"] = [int(c) for c in res.candidates]
    return doc


def format_result(res: ResultFile) -> str:
    return _dumps(result_to_dict(res))


def parse_result(text: str) -> ResultFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError("expected a JSON object at top level", "$")
    pts = _need(doc, "tour", "$")
    if not isinstance(pts, list):
        raise InstanceFormatError("expected a list of points", "$.tour")
    tour = [_point(p, f"$.tour[{k}]", None) for k, p in enumerate(pts)]
    if len({len(p) for p in tour}) > 1:
        raise InstanceFormatError("tour points have different dimensions", "$.tour")
    length = _number(_need(doc, "length", "$"), "$.length")
    opt = {k: _number(doc[k], f"$.{k}") for k in ("lower_bound", "ratio", "wall_time", "eps")
           if doc.get(k) is not None}
    cands = doc.get("candidates", [])
    return ResultFile(np.array(tour, dtype=float).reshape(len(tour), -1), length,
                      candidates=list(cands), algorithm=doc.get("algorithm"), **opt)


def read_result(path) -> ResultFile:
    return parse_result(Path(path).read_text())


def write_result(res: ResultFile, path) -> None:
    Path(path).write_text(format_result(res))


__all__ = [
    "InstanceFormatError", "ResultFile", "parse_instance", "read_instance", "format_instance",
    "write_instance", "instance_to_dict", "instance_from_dict", "region_to_dict",
    "parse_result", "read_result", "format_result", "write_result", "result_to_dict",
]
