"""Independent reference computations used by the tests.

Nothing here imports the solver code paths it checks: enumeration is plain
itertools, projections go through shapely or dense sampling, and distances
are recomputed coordinate by coordinate in pure Python.
"""

from __future__ import annotations

import itertools
import math
from typing import List, Sequence

import numpy as np
from shapely.geometry import Point as SPoint
from shapely.geometry import Polygon as SPolygon
from shapely.ops import nearest_points


def dist(a, b) -> float:
    """Euclidean distance accumulating squared differences coordinate by
    coordinate, one rounding per operation (IEEE double, no fused ops)."""
    s = 0.0
    for x, y in zip(a, b):
        t = float(x) - float(y)
        s += t * t
    return math.sqrt(s)


def path_length(points) -> float:
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        total += dist(a, b)
    return total


def enumerate_best(sets: Sequence[np.ndarray], start, end) -> float:
    """Shortest start-to-end path through one point of each set, by full enumeration."""
    best = math.inf
    for combo in itertools.product(*[list(map(tuple, s)) for s in sets]):
        best = min(best, path_length([tuple(start), *combo, tuple(end)]))
    return best


def transition_minima(prev: np.ndarray, weights: np.ndarray, nxt: np.ndarray) -> List[float]:
    """min_j (w_j + |a_j - b_i|) for every b_i, with explicit loops."""
    return [min(float(w) + dist(a, b) for a, w in zip(prev, weights)) for b in nxt]


def polygon_nearest(vertices, p):
    """Nearest point of a convex polygon (filled) via shapely."""
    poly = SPolygon(vertices)
    q = nearest_points(poly, SPoint(p))[0]
    return np.array([q.x, q.y])


def disk_boundary(center, radius, count: int) -> np.ndarray:
    t = np.linspace(0.0, 2 * math.pi, count, endpoint=False)
    return np.asarray(center) + radius * np.stack([np.cos(t), np.sin(t)], axis=1)


def sphere_samples(center, radius, count: int, d: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(count, d))
    g /= np.linalg.norm(g, axis=1)[:, None]
    return np.asarray(center) + radius * g


def nearest_distance(samples: np.ndarray, cands: np.ndarray) -> np.ndarray:
    """Distance from every sample to its nearest candidate (chunked brute force)."""
    out = np.empty(len(samples))
    for lo in range(0, len(samples), 2000):
        block = samples[lo:lo + 2000]
        d2 = ((block[:, None, :] - cands[None, :, :]) ** 2).sum(axis=2)
        out[lo:lo + 2000] = np.sqrt(d2.min(axis=1))
    return out


def one_disk_opt(start, end, center, radius, count: int = 200_000) -> float:
    """OPT for a single disk region: dense boundary sampling, or the straight
    segment when it meets the disk."""
    a, b, c = (np.asarray(v, dtype=float) for v in (start, end, center))
    ab = b - a
    t = 0.0 if not ab.any() else float(np.clip((c - a) @ ab / (ab @ ab), 0.0, 1.0))
    if np.linalg.norm(a + t * ab - c) <= radius:
        return float(np.linalg.norm(ab))
    pts = disk_boundary(c, radius, count)
    return float(np.min(np.linalg.norm(pts - a, axis=1) + np.linalg.norm(pts - b, axis=1)))


def two_disk_reflection_opt() -> float:
    """Closed form for the fixed two-disk instance: |(0,0)-(4,-3)| + |(4,-3)-(6,-2)|."""
    return 5.0 + math.sqrt(5.0)


def convex_position_pair(rng, na: int, nb: int):
    """Two point sets in convex position (points on ellipse arcs) whose hulls
    are disjoint: the second ellipse is shifted clear of the first."""
    def arc(count, center):
        ax, ay = rng.uniform(0.5, 2.0, 2)
        rot = rng.uniform(0, 2 * math.pi)
        span = rng.uniform(0.3, 2 * math.pi)
        t = np.sort(rng.uniform(0, span, count)) + rng.uniform(0, 2 * math.pi)
        e = np.stack([ax * np.cos(t), ay * np.sin(t)], axis=1)
        r = np.array([[math.cos(rot), -math.sin(rot)], [math.sin(rot), math.cos(rot)]])
        return e @ r.T + center
    direction = rng.normal(size=2)
    direction /= np.linalg.norm(direction)
    a = arc(na, np.zeros(2))
    b = arc(nb, direction * rng.uniform(4.5, 10.0))
    pa, pb = rng.permutation(na), rng.permutation(nb)
    return a[pa], b[pb]


def harmonic_tail(n: int) -> float:
    return sum(1.0 / i for i in range(3, n + 1))
