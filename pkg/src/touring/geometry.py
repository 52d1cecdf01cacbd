"""Regions, closest-point oracles and tour arithmetic.

Every region is an immutable dataclass exposing ``project`` (closest point),
``contains`` (membership up to a tolerance) and ``support`` (support
function, used by the dual certificate).  All oracles accept either a single
point of shape ``(d,)`` or a batch of shape ``(m, d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union as TUnion

import numpy as np

DEFAULT_TOL = 1e-9

Coords = Tuple[float, ...]


class GeometryError(ValueError):
    """Invalid geometric input (dimension mismatch, malformed region, ...)."""


def as_point(p, d: Optional[int] = None) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise GeometryError(f"expected a 1-D coordinate vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("point coordinates must be finite")
    if d is not None and arr.shape[0] != d:
        raise GeometryError(f"dimension mismatch: expected {d}, got {arr.shape[0]}")
    return arr


def _coords(p) -> Coords:
    return tuple(float(x) for x in as_point(p))


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def _batch(region_dim: int, p) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(p, dtype=float)
    single = arr.ndim == 1
    arr2 = arr.reshape(1, -1) if single else arr
    if arr2.ndim != 2 or arr2.shape[1] != region_dim:
        raise GeometryError(
            f"dimension mismatch: region is {region_dim}-D, query has shape {arr.shape}")
    return arr2, single


def _norms(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", v, v))


class Region:
    """Common interface of all region variants."""

    dim: int

    def project(self, p) -> np.ndarray:
        pts, single = _batch(self.dim, p)
        out = self._project(pts)
        return out[0] if single else out

    def contains(self, p, tol: float = DEFAULT_TOL):
        if tol < 0:
            raise GeometryError("tolerance must be nonnegative")
        pts, single = _batch(self.dim, p)
        out = self._contains(pts, tol)
        return bool(out[0]) if single else out

    def support(self, y) -> float:
        """max over x in the region of y . x"""
        return float(self._support(as_point(y, self.dim)))

    @property
    def parts(self) -> Tuple["Region", ...]:
        return (self,)

    def _contains(self, pts: np.ndarray, tol: float) -> np.ndarray:
        return _norms(pts - self._project(pts)) <= tol

    def _project(self, pts: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def _support(self, y: np.ndarray) -> float:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class Ball(Region):
    center: Coords
    radius: float
    _c: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "center", _coords(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not np.isfinite(self.radius) or self.radius < 0:
            raise GeometryError(f"ball radius must be finite and >= 0, got {self.radius}")
        object.__setattr__(self, "_c", _frozen_array(self.center))

    @property
    def dim(self) -> int:
        return len(self.center)

    @property
    def c(self) -> np.ndarray:
        return self._c

    def _project(self, pts):
        v = pts - self._c
        n = _norms(v)
        scale = np.where(n > self.radius, self.radius / np.where(n > 0, n, 1.0), 1.0)
        return self._c + v * scale[:, None]

    def _contains(self, pts, tol):
        return _norms(pts - self._c) <= self.radius + tol

    def _support(self, y):
        return float(y @ self._c) + self.radius * float(np.linalg.norm(y))


@dataclass(frozen=True)
class Box(Region):
    lo: Coords
    hi: Coords
    _lo: np.ndarray = field(init=False, repr=False, compare=False)
    _hi: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lo", _coords(self.lo))
        object.__setattr__(self, "hi", _coords(self.hi))
        if len(self.lo) != len(self.hi):
            raise GeometryError("box corners have different dimensions")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise GeometryError("box min must be <= max componentwise")
        object.__setattr__(self, "_lo", _frozen_array(self.lo))
        object.__setattr__(self, "_hi", _frozen_array(self.hi))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def center(self) -> np.ndarray:
        return (self._lo + self._hi) / 2

    def _project(self, pts):
        return np.clip(pts, self._lo, self._hi)

    def _support(self, y):
        return float(np.maximum(y * self._lo, y * self._hi).sum())


def _segment_project(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.broadcast_to(a, pts.shape).copy()
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    return a + t[:, None] * ab


@dataclass(frozen=True)
class Segment(Region):
    a: Coords
    b: Coords
    _a: np.ndarray = field(init=False, repr=False, compare=False)
    _b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "a", _coords(self.a))
        object.__setattr__(self, "b", _coords(self.b))
        if len(self.a) != len(self.b):
            raise GeometryError("segment endpoints have different dimensions")
        object.__setattr__(self, "_a", _frozen_array(self.a))
        object.__setattr__(self, "_b", _frozen_array(self.b))

    @property
    def dim(self) -> int:
        return len(self.a)

    def _project(self, pts):
        return _segment_project(pts, self._a, self._b)

    def _support(self, y):
        return max(float(y @ self._a), float(y @ self._b))


def _cross2(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class ConvexPolygon(Region):
    """Strictly convex polygon in the plane, vertices counterclockwise."""

    vertices: Tuple[Coords, ...]
    _v: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(_coords(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise GeometryError("a polygon needs at least 3 vertices")
        if any(len(v) != 2 for v in verts):
            raise GeometryError("polygons are only supported in 2 dimensions")
        m = len(verts)
        for i in range(m):
            if _cross2(verts[i], verts[(i + 1) % m], verts[(i + 2) % m]) <= 0:
                raise GeometryError("polygon vertices must be strictly convex and counterclockwise")
        object.__setattr__(self, "_v", _frozen_array(verts))

    @property
    def dim(self) -> int:
        return 2

    @property
    def centroid(self) -> np.ndarray:
        return self._v.mean(axis=0)

    def _inside(self, pts: np.ndarray) -> np.ndarray:
        v = self._v
        w = np.roll(v, -1, axis=0)
        e = w - v
        # cross(e_k, p - v_k) >= 0 for every edge
        rel = pts[:, None, :] - v[None, :, :]
        cr = e[None, :, 0] * rel[:, :, 1] - e[None, :, 1] * rel[:, :, 0]
        return np.all(cr >= 0, axis=1)

    def _project(self, pts):
        v = self._v
        w = np.roll(v, -1, axis=0)
        best = None
        best_d = None
        for k in range(len(v)):
            q = _segment_project(pts, v[k], w[k])
            dq = _norms(pts - q)
            if best is None:
                best, best_d = q, dq
            else:
                better = dq < best_d
                best[better] = q[better]
                best_d = np.where(better, dq, best_d)
        inside = self._inside(pts)
        best[inside] = pts[inside]
        return best

    def _support(self, y):
        return float(np.max(self._v @ y))


@dataclass(frozen=True)
class Union(Region):
    """Union of convex parts; the parts may intersect."""

    members: Tuple[Region, ...]

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise GeometryError("a union needs at least one part")
        if any(isinstance(m, Union) for m in members):
            raise GeometryError("nested unions are not allowed")
        if len({m.dim for m in members}) != 1:
            raise GeometryError("union parts have different dimensions")

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def parts(self) -> Tuple[Region, ...]:
        return self.members

    def _project(self, pts):
        best = self.members[0]._project(pts)
        best_d = _norms(pts - best)
        for m in self.members[1:]:
            q = m._project(pts)
            dq = _norms(pts - q)
            better = dq < best_d
            best[better] = q[better]
            best_d = np.where(better, dq, best_d)
        return best

    def _contains(self, pts, tol):
        out = np.zeros(len(pts), dtype=bool)
        for m in self.members:
            out |= m._contains(pts, tol)
        return out

    def _support(self, y):
        return max(m._support(y) for m in self.members)


def project(region: Region, p) -> np.ndarray:
    """Closest point of ``region`` to ``p`` (batched over rows of ``p``)."""
    return region.project(p)


def contains(region: Region, p, tol: float = DEFAULT_TOL):
    return region.contains(p, tol)


def region_anchor(region: Region) -> np.ndarray:
    """A deterministic point inside the region (center-ish)."""
    part = region.parts[0]
    if isinstance(part, Ball):
        return part.c.copy()
    if isinstance(part, Box):
        return part.center
    if isinstance(part, ConvexPolygon):
        return part.centroid
    if isinstance(part, Segment):
        return (part._a + part._b) / 2
    raise GeometryError(f"unknown region type {type(part).__name__}")


def outer_radius(region: Region) -> float:
    """Radius of a ball around ``region_anchor`` containing the region."""
    c = region_anchor(region)
    r = 0.0
    for part in region.parts:
        if isinstance(part, Ball):
            r = max(r, float(np.linalg.norm(part.c - c)) + part.radius)
        elif isinstance(part, Box):
            corners = np.array(np.meshgrid(*zip(part.lo, part.hi))).reshape(part.dim, -1).T
            r = max(r, float(np.max(_norms(corners - c))))
        elif isinstance(part, ConvexPolygon):
            r = max(r, float(np.max(_norms(part._v - c))))
        elif isinstance(part, Segment):
            r = max(r, float(np.max(_norms(np.stack([part._a, part._b]) - c))))
    return r


@dataclass(frozen=True)
class FatMeta:
    """Inner ball radius ``r_h`` and an upper bound on ``r_H / r_h``."""

    r_h: float
    fatness_bound: float

    def __post_init__(self):
        object.__setattr__(self, "r_h", float(self.r_h))
        object.__setattr__(self, "fatness_bound", float(self.fatness_bound))
        if not self.r_h > 0:
            raise GeometryError("fat meta r_h must be positive")
        if not self.fatness_bound >= 1:
            raise GeometryError("fatness bound must be >= 1")

    @property
    def outer_radius(self) -> float:
        return self.r_h * self.fatness_bound


def infer_fat_meta(region: Region) -> Optional[FatMeta]:
    """Fatness data that can be read off directly (balls, boxes), else None."""
    if isinstance(region, Ball) and region.radius > 0:
        return FatMeta(region.radius, 1.0)
    if isinstance(region, Box):
        half = (region._hi - region._lo) / 2
        if np.all(half > 0):
            return FatMeta(float(half.min()), float(np.linalg.norm(half) / half.min()))
    return None


@dataclass(frozen=True)
class Instance:
    """Ordered touring problem: start, regions R_1..R_n, end."""

    start: Coords
    end: Coords
    regions: Tuple[Region, ...] = ()
    fat: Tuple[Optional[FatMeta], ...] = ()
    disjoint: bool = False
    eps: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "start", _coords(self.start))
        object.__setattr__(self, "end", _coords(self.end))
        object.__setattr__(self, "regions", tuple(self.regions))
        fat = tuple(self.fat) if self.fat else (None,) * len(self.regions)
        if len(fat) != len(self.regions):
            raise GeometryError("fat metadata list must match the region list")
        object.__setattr__(self, "fat", fat)
        d = len(self.start)
        if len(self.end) != d:
            raise GeometryError("start and end have different dimensions")
        for i, r in enumerate(self.regions):
            if r.dim != d:
                raise GeometryError(f"region {i + 1} has dimension {r.dim}, instance has {d}")

    @property
    def dim(self) -> int:
        return len(self.start)

    @property
    def n(self) -> int:
        return len(self.regions)

    @property
    def p_start(self) -> np.ndarray:
        return np.array(self.start)

    @property
    def p_end(self) -> np.ndarray:
        return np.array(self.end)

    def fat_meta(self, i: int) -> Optional[FatMeta]:
        """FatMeta of region ``i`` (0-based), falling back to inference."""
        return self.fat[i] if self.fat[i] is not None else infer_fat_meta(self.regions[i])

    def all_balls(self) -> bool:
        return all(isinstance(r, Ball) for r in self.regions)

    def with_endpoints(self, start, end, regions: Sequence[Region],
                       fat: Sequence[Optional[FatMeta]] = ()) -> "Instance":
        return Instance(start, end, tuple(regions), tuple(fat), self.disjoint, self.eps)


def tour_length(points) -> float:
    """Sum of consecutive Euclidean distances."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise GeometryError("a tour needs at least two points of equal dimension")
    return float(_norms(np.diff(pts, axis=0)).sum())


@dataclass(frozen=True)
class Tour:
    points: np.ndarray
    length: float
    info: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_points(cls, points, **info) -> "Tour":
        pts = np.array(points, dtype=float)
        return cls(pts, tour_length(pts), dict(info))

    @property
    def n(self) -> int:
        return len(self.points) - 2


def tour_violations(instance: Instance, tour: Tour, tol: float = 1e-6) -> list:
    """Indices (1-based region numbers) whose tour point misses its region."""
    bad = []
    pts = tour.points
    if len(pts) != instance.n + 2:
        raise GeometryError("tour length does not match instance")
    for i, r in enumerate(instance.regions, start=1):
        if not r.contains(pts[i], tol):
            bad.append(i)
    return bad


def is_valid_tour(instance: Instance, tour: Tour, tol: float = 1e-6) -> bool:
    pts = tour.points
    if not (np.allclose(pts[0], instance.start, atol=tol) and np.allclose(pts[-1], instance.end, atol=tol)):
        return False
    return not tour_violations(instance, tour, tol)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    return v / n if n > 0 else np.zeros_like(v)


RegionLike = TUnion[Ball, Box, Segment, ConvexPolygon, Union]
