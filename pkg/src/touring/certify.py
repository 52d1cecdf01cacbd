"""Independent checks on tours: stationarity residuals, local refinement,
dual lower bounds and a brute-force reference solver.

The touring problem over convex regions is a convex program (a sum of
norms minimized over a product of convex sets).  A tour whose every point
satisfies the reflection condition is therefore globally optimal, and the
dual certificate below turns any tour into a valid lower bound on OPT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from .discretize import WorkingBox, dedup, uniform_boundary_points
from .dp import solve_disjoint_dp, solve_intersecting_dp
from .geometry import (Ball, GeometryError, Instance, Region, Tour, Union, region_anchor,
                       tour_length, unit)

ZERO_SEGMENT = 1e-14
ARMIJO = 0.1
MAX_ITERS = 100_000
ORACLE_GUARD = 100_000
STALL_SWEEPS = 50


class GuardError(RuntimeError):
    """The requested computation exceeds its size guard."""


@dataclass
class Residual:
    per_region: np.ndarray
    max_residual: float
    flagged: List[int] = field(default_factory=list)


@dataclass
class Certificate:
    z: np.ndarray
    y: np.ndarray
    w: np.ndarray
    bound: float


def _unit_or_none(v: np.ndarray, scale: float):
    n = float(np.linalg.norm(v))
    if n <= ZERO_SEGMENT * max(1.0, scale):
        return None
    return v / n


def _gradient(prev: np.ndarray, p: np.ndarray, nxt: np.ndarray, scale: float):
    """Minimum-norm subgradient of |p - prev| + |p - nxt| with respect to p.

    If either neighbor coincides with ``p`` the subdifferential of that term
    is the whole unit ball, which contains minus the other unit vector, so
    the minimum-norm subgradient is zero.  Returns (gradient, degenerate).
    """
    u = _unit_or_none(p - prev, scale)
    v = _unit_or_none(p - nxt, scale)
    if u is None or v is None:
        return np.zeros_like(p), True
    return u + v, False


def _ball_residual(ball: Ball, p: np.ndarray, g: np.ndarray, tol: float) -> float:
    off = p - ball.c
    dist = float(np.linalg.norm(off))
    if ball.radius == 0 or dist >= ball.radius - tol:
        if dist == 0:
            return 0.0
        normal = off / dist
        gn = float(g @ normal)
        if gn <= 0:
            # moving outward is blocked; only the tangential part counts
            return float(np.linalg.norm(g - gn * normal))
        return float(np.linalg.norm(g))
    return float(np.linalg.norm(g))


def _projected_residual(region: Region, p: np.ndarray, g: np.ndarray) -> float:
    return float(np.linalg.norm(p - region.project(p - g)))


def _scale(points: np.ndarray) -> float:
    return float(np.max(np.abs(points))) if len(points) else 1.0


def reflection_residual(instance: Instance, tour: Tour, tol: float = 1e-9) -> Residual:
    """Violation of the pass-through / perfect-reflection condition per ball."""
    if not instance.all_balls():
        raise GeometryError("reflection residual is only defined for ball regions")
    return _residual(list(instance.regions), np.asarray(tour.points, dtype=float), tol)


def _residual(regions: Sequence[Region], pts: np.ndarray, tol: float = 1e-9) -> Residual:
    scale = _scale(pts)
    res = np.zeros(len(regions))
    flagged = []
    for i, region in enumerate(regions, start=1):
        g, degenerate = _gradient(pts[i - 1], pts[i], pts[i + 1], scale)
        if degenerate:
            flagged.append(i)
        if isinstance(region, Ball):
            res[i - 1] = _ball_residual(region, pts[i], g, tol)
        else:
            res[i - 1] = _projected_residual(region, pts[i], g)
    return Residual(res, float(res.max()) if len(res) else 0.0, flagged)


def _dist_change(q, p, anchor) -> float:
    """|q - anchor| - |p - anchor| without cancellation."""
    dq = float(np.linalg.norm(q - anchor))
    dp = float(np.linalg.norm(p - anchor))
    if dq + dp == 0:
        return 0.0
    return float((q - p) @ (q + p - 2 * anchor)) / (dq + dp)


def _point_residual(region: Region, prev, p, nxt, scale, tol: float = 1e-9) -> float:
    g, _ = _gradient(prev, p, nxt, scale)
    if isinstance(region, Ball):
        return _ball_residual(region, p, g, tol)
    return _projected_residual(region, p, g)


def _try_step(region, prev, p, nxt, g, t):
    """Projected step of size t; returns (point, change) or None if rejected."""
    q = region.project(p - t * g)
    if not np.any(q != p):
        return None
    change = _dist_change(q, p, prev) + _dist_change(q, p, nxt)
    if change < 0 and change <= -ARMIJO * float(g @ (p - q)):
        return q, change
    return None


def _descend_point(region: Region, prev, p, nxt, scale, inner: int = 50):
    """A few projected-gradient steps on one tour point.

    Backtracking halves from step 1.0 until the Armijo test holds; an
    accepted unit step is then doubled while that keeps improving, which
    matters along nearly straight pass-throughs where the curvature is tiny.
    The Armijo test compares exact length differences, which stay accurate
    long after the lengths themselves agree to machine precision.
    """
    moved_any = False
    for _ in range(inner):
        g, degenerate = _gradient(prev, p, nxt, scale)
        if degenerate or not np.any(g):
            break
        step = None
        t = 1.0
        while t > 1e-18 * max(1.0, scale):
            step = _try_step(region, prev, p, nxt, g, t)
            if step is not None:
                break
            t *= 0.5
        if step is not None and t == 1.0:
            while t < 1e12:
                bigger = _try_step(region, prev, p, nxt, g, 2 * t)
                if bigger is None or bigger[1] >= step[1]:
                    break
                step, t = bigger, 2 * t
        if step is None:
            break
        p = step[0]
        moved_any = True
    return p, moved_any


def _segment_ball_hit(a, b, ball: Ball):
    """Parameter interval of segment ab inside the ball, or None."""
    ab = b - a
    aa = float(ab @ ab)
    off = a - ball.c
    if aa == 0:
        return (0.0, 1.0) if float(off @ off) <= ball.radius ** 2 else None
    # |off + t ab|^2 = r^2
    half_b = float(off @ ab)
    cc = float(off @ off) - ball.radius ** 2
    disc = half_b * half_b - aa * cc
    if disc < 0:
        return None
    root = math.sqrt(disc)
    t0 = max(0.0, (-half_b - root) / aa)
    t1 = min(1.0, (-half_b + root) / aa)
    return (t0, t1) if t0 <= t1 else None


def _ball_point_minimizer(ball: Ball, prev, p, nxt):
    """Minimize |q - prev| + |q - nxt| over the ball, staying close to p.

    If the segment between the neighbors meets the ball, the nearest point
    of that chord to p is optimal.  Otherwise the optimum is the reflection
    point on the arc between the neighbor directions, found by bisection on
    the tangential derivative.
    """
    if ball.radius == 0:
        return ball.c.copy()
    hit = _segment_ball_hit(prev, nxt, ball)
    if hit is not None:
        ab = nxt - prev
        aa = float(ab @ ab)
        t = float((p - prev) @ ab) / aa if aa > 0 else 0.0
        t = min(max(t, hit[0]), hit[1])
        return ball.project(prev + t * ab)
    u = unit(prev - ball.c)
    v = unit(nxt - ball.c)
    w = v - float(v @ u) * u
    if not np.any(u) or np.linalg.norm(w) <= 1e-15:
        return ball.c + ball.radius * (u if np.any(u) else v)
    e2 = w / np.linalg.norm(w)
    beta = math.atan2(float(v @ e2), float(v @ u))

    def at(theta):
        return ball.c + ball.radius * (math.cos(theta) * u + math.sin(theta) * e2)

    def slope(theta):
        x = at(theta)
        tangent = -math.sin(theta) * u + math.cos(theta) * e2
        return float((unit(x - prev) + unit(x - nxt)) @ tangent)

    lo, hi = 0.0, beta
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if slope(mid) < 0:
            lo = mid
        else:
            hi = mid
    cand = [at(lo), at(hi)]
    q = min(cand, key=lambda x: _local_length_exact(prev, x, nxt))
    return q


def _local_length_exact(prev, q, nxt) -> float:
    return float(np.linalg.norm(q - prev) + np.linalg.norm(q - nxt))


def _update_point(region: Region, prev, p, nxt, scale):
    """One block update; never increases the local length beyond rounding."""
    if isinstance(region, Ball):
        q = _ball_point_minimizer(region, prev, p, nxt)
        change = _dist_change(q, p, prev) + _dist_change(q, p, nxt)
        noise = 4 * np.finfo(float).eps * (np.linalg.norm(p - prev) + np.linalg.norm(p - nxt))
        if np.any(q != p) and change <= noise:
            return q, True
        return p, False
    return _descend_point(region, prev, p, nxt, scale)


def _convex_parts(instance: Instance, pts: np.ndarray) -> List[Region]:
    """For each region, the convex part that currently holds its tour point."""
    parts = []
    for i, region in enumerate(instance.regions, start=1):
        if isinstance(region, Union):
            d = [float(np.linalg.norm(pts[i] - m.project(pts[i]))) for m in region.parts]
            parts.append(region.parts[int(np.argmin(d))])
        else:
            parts.append(region)
    return parts


def refine_local(instance: Instance, tour: Tour, tol: float = 1e-10,
                 max_iters: int = MAX_ITERS) -> Tour:
    """Cyclic projected-gradient descent toward the reflection condition.

    Unions are refined within the convex part that holds the current point.
    The length never increases.  ``info`` records ``converged``,
    ``iterations`` and ``max_residual``.
    """
    pts = np.array(tour.points, dtype=float)
    if len(pts) != instance.n + 2:
        raise GeometryError("tour does not match instance")
    parts = _convex_parts(instance, pts)
    # start from a feasible tour
    for i, part in enumerate(parts, start=1):
        pts[i] = part.project(pts[i])
    scale = _scale(pts)
    iters = 0
    res = _residual(parts, pts)
    best_res, since_best = res.max_residual, 0
    while res.max_residual > tol and iters < max_iters:
        iters += 1
        moved = False
        for i, part in enumerate(parts, start=1):
            pts[i], step = _update_point(part, pts[i - 1], pts[i], pts[i + 1], scale)
            moved |= step
        res = _residual(parts, pts)
        if res.max_residual < best_res:
            best_res, since_best = res.max_residual, 0
        else:
            since_best += 1
        if not moved or since_best >= STALL_SWEEPS:
            # no admissible descent step left at floating point resolution
            break
    info = dict(tour.info)
    info.update(converged=bool(res.max_residual <= tol), iterations=iters,
                max_residual=res.max_residual)
    return Tour(pts, tour_length(pts), info)


def dual_certificate(instance: Instance, tour: Tour) -> Certificate:
    """Dual feasible point built from the tour's segment directions.

    ``z_i`` is the unit direction of segment i (p_i -> p_{i+1});
    ``y_i = z_i - z_{i-1}`` with z_{-1} = z_{n+1} = 0.  For every valid tour
    q, length(q) >= sum z_i . (q_{i+1} - q_i) = -sum y_i . q_i, and the
    last sum is bounded through the support function of each region.  For
    balls this is ``-sum w_i r_i - sum y_i . c_i`` with ``w_i = |y_i|``.
    """
    pts = np.asarray(tour.points, dtype=float)
    n = instance.n
    d = instance.dim
    if len(pts) != n + 2:
        raise GeometryError("tour does not match instance")
    seg = np.diff(pts, axis=0)
    lens = np.linalg.norm(seg, axis=1)
    scale = _scale(pts)
    nonzero = np.nonzero(lens > ZERO_SEGMENT * max(1.0, scale))[0]
    z = np.zeros((n + 1, d))
    if len(nonzero):
        for i in range(n + 1):
            k = nonzero[np.argmin(np.abs(nonzero - i))]
            z[i] = seg[k] / lens[k]
    zpad = np.vstack([np.zeros((1, d)), z, np.zeros((1, d))])
    y = zpad[1:] - zpad[:-1]
    w = np.linalg.norm(y, axis=1)
    if not len(nonzero):
        return Certificate(z, y, w, 0.0)
    start = Ball(instance.start, 0.0)
    end = Ball(instance.end, 0.0)
    regions = [start] + list(instance.regions) + [end]
    bound = -sum(r.support(y[i]) for i, r in enumerate(regions))
    return Certificate(z, y, w, float(bound))


def brute_oracle(instance: Instance, resolution: float = 0.05, refine: bool = True,
                 tol: float = 1e-10, guard: int = ORACLE_GUARD) -> Tour:
    """Reference tour from a dense discretization, exact DP and refinement.

    Candidates are face-lattice projections at relative pitch ``resolution``
    inside a box around the start that contains every tour no longer than the
    trivial one, plus one interior point per convex part and the projections
    of start and end.  ``info["bracket"]`` is ``(dual bound, length)``.
    """
    from .approx import trivial_approx

    if not 0 < resolution <= 1:
        raise GeometryError("resolution must be in (0, 1]")
    p0 = instance.p_start
    if instance.n == 0:
        t = Tour.from_points([p0, instance.p_end])
        t.info["bracket"] = (t.length, t.length)
        return t
    triv = trivial_approx(instance)
    side = 2.0 * triv.length if triv.length > 0 else 1.0
    box = WorkingBox(p0, side)
    sets = []
    total = 0
    for i, region in enumerate(instance.regions, start=1):
        pts = [uniform_boundary_points(region, box, resolution, i).points]
        extra = [region_anchor(part) for part in region.parts]
        extra += [region.project(p0), region.project(instance.p_end), triv.points[i]]
        pts.append(np.array(extra))
        s = dedup(np.concatenate(pts))
        total += len(s)
        if total > guard:
            raise GuardError(
                f"oracle needs more than {guard} candidates (reached {total} at region {i}); "
                f"use a coarser resolution")
        sets.append(s)
    if instance.disjoint:
        tour = solve_disjoint_dp(sets, p0, instance.p_end)
    else:
        tour = solve_intersecting_dp(sets, instance.regions, p0, instance.p_end)
    if refine:
        tour = refine_local(instance, tour, tol)
    cert = dual_certificate(instance, tour)
    tour.info["bracket"] = (cert.bound, tour.length)
    tour.info["candidates"] = [len(s) for s in sets]
    return tour


__all__ = [
    "GuardError", "Residual", "Certificate", "reflection_residual", "refine_local",
    "dual_certificate", "brute_oracle",
]
