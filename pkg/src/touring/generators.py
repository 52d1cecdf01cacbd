"""Instance generators: random disjoint balls and a few fixed constructions."""

from __future__ import annotations

import math
from typing import List

import numpy as np

from .geometry import Ball, GeometryError, Instance, Segment

MAX_ATTEMPTS = 1_000_000
RADIUS_LAWS = ("unit", "uniform", "loguniform")
# slack for recomputing a contact point x_j + w from x_j in floating point
CONTACT_TOL = 1e-12


def _radius(rng: np.random.Generator, law: str) -> float:
    if law == "unit":
        return 1.0
    if law == "uniform":
        return float(rng.uniform(0.2, 1.0))
    if law == "loguniform":
        return float(math.exp(rng.uniform(math.log(0.05), 0.0)))
    raise GeometryError(f"unknown radius law {law!r}; expected one of {RADIUS_LAWS}")


def gen_random_disjoint_balls(n: int, d: int = 2, seed: int = 0, radius_law: str = "unit",
                              margin: float = 0.1, arena: float = None) -> Instance:
    """Rejection-sample ``n`` pairwise disjoint balls in a cube.

    Centers are kept at distance > r_a + r_b + margin from each other, and
    the start and end points stay ``margin`` outside every ball.  The arena
    side defaults to a size that keeps the packing density low.
    """
    if n < 0 or d < 1:
        raise GeometryError("need n >= 0 and d >= 1")
    rng = np.random.default_rng(seed)
    if arena is None:
        arena = max(8.0, 4.0 * (n ** (1.0 / d)) * (1.0 + margin))
    start = rng.uniform(0, arena, d)
    end = rng.uniform(0, arena, d)
    centers: List[np.ndarray] = []
    radii: List[float] = []
    attempts = 0
    while len(centers) < n:
        r = _radius(rng, radius_law)
        c = rng.uniform(0, arena, d)
        attempts += 1
        if attempts > MAX_ATTEMPTS:
            raise GeometryError(
                f"could not place {n} disjoint balls after {MAX_ATTEMPTS} attempts; "
                f"use a larger arena than {arena:g}")
        if min(np.linalg.norm(c - start), np.linalg.norm(c - end)) <= r + margin:
            continue
        if centers:
            gaps = np.linalg.norm(np.array(centers) - c, axis=1) - (np.array(radii) + r)
            if np.any(gaps <= margin):
                continue
        centers.append(c)
        radii.append(r)
    balls = tuple(Ball(c, r) for c, r in zip(centers, radii))
    return Instance(start, end, balls, disjoint=True)


def tangent_positions(n: int, length: float = 8.0) -> List[float]:
    """Greedy x-coordinates of disks of radius 1/i tangent to the x-axis.

    Two such disks are disjoint iff their centers are at least
    2 sqrt(r_i r_j) apart horizontally.  Disk i takes the smallest
    admissible x among 0 and the right-hand contact points of the disks
    already placed.  The leftmost admissible point of a union of forbidden
    intervals is always one of those candidates, so this matches a fine
    left-to-right scan.
    """
    xs: List[float] = []
    for i in range(1, n + 1):
        ri = 1.0 / i
        cands = [0.0] + [x + 2.0 * math.sqrt(ri / j) for j, x in enumerate(xs, start=1)]
        best = None
        for x in sorted(cands):
            if x > length:
                break
            if all(abs(x - xj) >= 2.0 * math.sqrt(ri / j) - CONTACT_TOL
                   for j, xj in enumerate(xs, start=1)):
                best = x
                break
        if best is None:
            raise GeometryError(f"no room for disk {i} on [0, {length}]")
        xs.append(best)
    return xs


def gen_tangent_construction(n: int) -> Instance:
    """Disks of radius 1/i tangent to the segment (0,0)-(8,0).

    Disks are placed greedily (largest first) and the touring order is left
    to right, so the segment itself is a valid tour of length 8 while the
    radii sum like the harmonic series.
    """
    if n < 1:
        raise GeometryError("need n >= 1")
    xs = tangent_positions(n)
    disks = [Ball((x, 1.0 / i), 1.0 / i) for i, x in enumerate(xs, start=1)]
    order = sorted(range(n), key=lambda k: (xs[k], k))
    return Instance((0.0, 0.0), (8.0, 0.0), tuple(disks[k] for k in order), disjoint=True)


def line_reflection_instance(half_width: float = 10.0) -> Instance:
    """Start (-1, 1), end (1, 1) and a stretch of the x-axis; OPT = 2 sqrt 2."""
    return Instance((-1.0, 1.0), (1.0, 1.0),
                    (Segment((-half_width, 0.0), (half_width, 0.0)),), disjoint=True)


def two_disk_reflection_instance() -> Instance:
    """Two unit disks, start (0, 0), end (6, -2).

    The straight segment from the start to (4, -3) crosses the first disk,
    and the second disk is placed so that its boundary reflects that segment
    at (4, -3) toward the end.  OPT = 5 + sqrt 5.
    """
    a = np.array([0.0, 0.0])
    c = np.array([4.0, -3.0])
    d = np.array([6.0, -2.0])
    u = (a - c) / np.linalg.norm(a - c) + (d - c) / np.linalg.norm(d - c)
    perp = u / np.linalg.norm(u)
    c2 = c - perp
    return Instance(tuple(a), tuple(d), (Ball((1.5, -2.0), 1.0), Ball(tuple(c2), 1.0)),
                    disjoint=True)


__all__ = [
    "gen_random_disjoint_balls", "gen_tangent_construction", "tangent_positions",
    "line_reflection_instance", "two_disk_reflection_instance", "RADIUS_LAWS",
]
