"""Approximation schemes for the touring regions problem.

The ladder is

* ``trivial_approx``: project the start onto every region ((2n+1)-approx);
* ``pseudo_approx``: discretize inside a box sized by a length guess ``L``
  and run exact DP; additive error ``gamma * L`` whenever ``OPT <= L``;
* ``constant_approx``: shrink the bracket ``L/B <= OPT <= L`` with repeated
  pseudo-approximations until ``B <= 4``;
* ``solve_convex_unions``: one more pseudo-approximation at
  ``gamma = eps / 4`` for a (1+eps)-approximation.

Fat bodies are handled by ``solve_fat`` (constant-size groups, one working
box per pair of representatives) and ``solve_fat_grouped`` (independent
subproblems of size about 1/eps).  Balls use ``solve_balls``, which places
points non-uniformly with a per-ball accuracy schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .discretize import (CandidateSet, WorkingBox, dedup, face_lattice, nonuniform_ball_points,
                         nonuniform_disk_points, uniform_boundary_points)
from .dp import solve_disjoint_dp, solve_intersecting_dp
from .geometry import Ball, GeometryError, Instance, Tour, unit

# Internal accuracy divisors: the schemes guarantee (1 + C*eps) for some
# unstated constant C, so they run at eps / divisor.  Calibrated so that the
# realized ratio against the reference solver stays below 1 + eps.
FAT_ACCURACY = 1.0
BALL_ACCURACY = 1.0
N0_BALLS = 3
N0_DEFAULT = 8
DISJOINT_TOL = 1e-9
# Planar candidate budget of the two largest disks in solve_balls: at most
# LARGEST_PAIR_CONSTANT / eps points together (face lattice 4/eps + 4 per
# disk plus the non-uniform runs, whose count is below 24/eps for eps <= 0.1).
LARGEST_PAIR_CONSTANT = 24.0
# Calibrated packing constant: OPT >= PACKING_CONSTANT * n * min r for
# n >= 3 disjoint balls.  A path meeting three mutually tangent unit balls in
# order is already about 0.48 long, and n >= 3 regions hold floor(n / 3) >= n / 5
# consecutive triples; 0.09 stays below 0.48 / 5.
PACKING_CONSTANT = 0.09
ALGORITHMS = ("auto", "unions", "fat", "balls")


class RefusedError(ValueError):
    """The instance does not meet the preconditions of the requested scheme."""


@dataclass(frozen=True)
class ApproxBracket:
    """``L / B <= OPT <= L``."""

    L: float
    B: float

    @property
    def lower(self) -> float:
        return self.L / self.B if self.B > 0 else 0.0


@dataclass
class GroupPlan:
    """Consecutive groups over indices 0..n+1 (0 = start, n+1 = end)."""

    groups: List[range]
    reps: List[int]
    radii: List[float]
    anchors: np.ndarray

    @property
    def k(self) -> int:
        return len(self.groups)


def _straight(instance: Instance, **info) -> Tour:
    return Tour.from_points([instance.p_start, instance.p_end], **info)


def trivial_approx(instance: Instance) -> Tour:
    """Visit every region at its closest point to the start."""
    p0 = instance.p_start
    pts = [p0] + [r.project(p0) for r in instance.regions] + [instance.p_end]
    return Tour.from_points(pts, method="trivial")


def _solve_dp(instance: Instance, sets) -> Tour:
    if instance.disjoint:
        return solve_disjoint_dp(sets, instance.p_start, instance.p_end)
    return solve_intersecting_dp(sets, instance.regions, instance.p_start, instance.p_end)


def pseudo_approx(instance: Instance, L: float, gamma: float) -> Tour:
    """Discretize every region inside a box of side 4L around the start.

    The face lattice has relative pitch gamma/(32n) and projected points are
    merged on a grid of the same pitch divided by sqrt(d), so every boundary
    point in the box stays within side * gamma / (16n) of a candidate.
    When OPT <= L the result is at most OPT + gamma * L.
    """
    if not 0 < gamma <= 1:
        raise GeometryError("gamma must be in (0, 1]")
    if not L > 0:
        raise GeometryError("L must be positive")
    n = instance.n
    if n == 0:
        return _straight(instance, method="pseudo")
    side = 4.0 * L
    box = WorkingBox(instance.p_start, side)
    pitch = gamma / (32.0 * n)
    merge = side * pitch / math.sqrt(instance.dim)
    lattice = face_lattice(box, pitch)
    sets = [uniform_boundary_points(r, box, pitch, i, merge_tol=merge, lattice=lattice)
            for i, r in enumerate(instance.regions, start=1)]
    tour = _solve_dp(instance, sets)
    tour.info.update(method="pseudo", candidates=[len(s) for s in sets])
    return tour


def constant_approx(instance: Instance):
    """Tour and bracket with ``OPT <= L <= 4 OPT``.

    Each round guesses ``G = sqrt(lo * hi / 2)`` and runs ``pseudo_approx``
    with gamma = 1.  A result of length at most 2G is a valid tour (new upper
    bound); a longer one proves OPT > G (new lower bound).  Either way the
    ratio B = hi / lo becomes at most sqrt(2B), which drops below 4 after
    ceil(log2(log2(B0) - 1)) rounds.
    """
    if instance.n == 0:
        t = _straight(instance, method="constant", iterations=0)
        return t, ApproxBracket(t.length, 1.0)
    best = trivial_approx(instance)
    if best.length == 0:
        best.info.update(method="constant", iterations=0)
        return best, ApproxBracket(0.0, 1.0)
    hi = best.length
    lo = hi / (2 * instance.n + 1)
    iterations = 0
    while hi > 4 * lo:
        iterations += 1
        guess = math.sqrt(lo * hi / 2)
        t = pseudo_approx(instance, guess, 1.0)
        if t.length <= 2 * guess:
            if t.length < hi:
                best, hi = t, t.length
        else:
            lo = max(lo, guess)
    best = Tour(best.points, best.length, dict(best.info, method="constant", iterations=iterations))
    return best, ApproxBracket(hi, hi / lo)


def solve_convex_unions(instance: Instance, eps: float) -> Tour:
    """(1+eps)-approximation for unions of convex bodies."""
    if not 0 < eps <= 1:
        raise GeometryError("eps must be in (0, 1]")
    if instance.n == 0:
        return _straight(instance, method="unions")
    base, bracket = constant_approx(instance)
    if bracket.L == 0:
        base.info["method"] = "unions"
        return base
    t = pseudo_approx(instance, bracket.L, eps / 4)
    if base.length < t.length:
        t = Tour(base.points, base.length, dict(t.info))
    t.info.update(method="unions", bracket=(bracket.lower, bracket.L))
    return t


# ---------------------------------------------------------------------------
# fat bodies


def balls_disjoint(regions: Sequence, tol: float = DISJOINT_TOL) -> bool:
    balls = [r for r in regions if isinstance(r, Ball)]
    if len(balls) < 2:
        return True
    c = np.array([b.c for b in balls])
    r = np.array([b.radius for b in balls])
    for i in range(len(balls) - 1):
        gap = np.linalg.norm(c[i + 1:] - c[i], axis=1) - (r[i + 1:] + r[i])
        if np.any(gap < -tol):
            return False
    return True


def _inner_radii(instance: Instance) -> List[float]:
    """r_h for indices 0..n+1 (the endpoints count as radius 0)."""
    radii = [0.0]
    for i in range(instance.n):
        meta = instance.fat_meta(i)
        if meta is None:
            raise GeometryError(f"region {i + 1} has no fatness data")
        radii.append(meta.r_h)
    return radii + [0.0]


def _outer_radii(instance: Instance) -> List[float]:
    return [0.0] + [instance.fat_meta(i).outer_radius for i in range(instance.n)] + [0.0]


def group_split(instance: Instance, s: int) -> GroupPlan:
    """Groups of ``s`` consecutive indices, each represented by its thinnest region.

    With fewer than ``s + 1`` indices the plan is the two groups {0..n} and
    {n+1}, so the start and end are the only representatives.
    """
    if s < 1:
        raise GeometryError("group size must be >= 1")
    radii = _inner_radii(instance)
    total = instance.n + 2
    k = max(math.ceil(total / s), 2)
    if math.ceil(total / s) >= 2:
        groups = [range(lo, min(lo + s, total)) for lo in range(0, total, s)]
    else:
        groups = [range(0, total - 1), range(total - 1, total)]
    assert len(groups) == k
    reps = [min(g, key=lambda j: (radii[j], j)) for g in groups]
    anchors = [instance.p_start]
    for rep in reps[1:-1]:
        anchors.append(instance.regions[rep - 1].project(anchors[-1]))
    anchors.append(instance.p_end)
    return GroupPlan(groups, reps, [radii[j] for j in reps], np.array(anchors))


def _sub_instance(instance: Instance, a: int, b: int, start, end, disjoint: bool) -> Instance:
    """Regions strictly between indices a and b, between the given endpoints."""
    regs = instance.regions[a:b - 1]
    fat = tuple(instance.fat_meta(j) for j in range(a, b - 1))
    return Instance(start, end, regs, fat, disjoint, instance.eps)


def _check_fat(instance: Instance):
    if instance.all_balls():
        if not balls_disjoint(instance.regions):
            raise RefusedError("balls overlap; the fat-body scheme needs disjoint regions")
    elif not instance.disjoint:
        raise RefusedError("the fat-body scheme needs an instance declared disjoint")
    for i in range(instance.n):
        if instance.fat_meta(i) is None:
            raise RefusedError(f"region {i + 1} has no fatness data")


def solve_fat(instance: Instance, eps: float, n0: Optional[int] = None) -> Tour:
    """(1 + C eps)-approximation for disjoint fat bodies.

    Regions are grouped in blocks of ``n0``.  Between consecutive
    representatives a constant approximation D of the anchor-to-anchor
    subtour fixes a ball of radius l = D + 4 m_a + 2 m_b around the first
    anchor (m = outer radii) that contains the optimal subpath; every region
    between the representatives, inclusive, is discretized in the cube around
    that ball.  A single DP over all candidates finishes.
    """
    if not 0 < eps <= 1:
        raise GeometryError("eps must be in (0, 1]")
    if instance.n == 0:
        return _straight(instance, method="fat")
    _check_fat(instance)
    if n0 is None:
        n0 = N0_BALLS if instance.all_balls() else N0_DEFAULT
    plan = group_split(instance, n0)
    outer = _outer_radii(instance)
    pitch = eps / FAT_ACCURACY
    chunks: List[List[np.ndarray]] = [[] for _ in range(instance.n)]
    for t in range(plan.k - 1):
        a, b = plan.reps[t], plan.reps[t + 1]
        sub = _sub_instance(instance, a, b, plan.anchors[t], plan.anchors[t + 1], True)
        _, bracket = constant_approx(sub)
        radius = bracket.L + 4 * outer[a] + 2 * outer[b]
        box = WorkingBox(plan.anchors[t], 2 * radius if radius > 0 else 1.0)
        for j in range(max(a, 1), min(b, instance.n) + 1):
            chunks[j - 1].append(uniform_boundary_points(instance.regions[j - 1], box, pitch).points)
    sets = [CandidateSet(j + 1, dedup(np.concatenate(c)), pitch) for j, c in enumerate(chunks)]
    tour = solve_disjoint_dp(sets, instance.p_start, instance.p_end)
    tour.info.update(method="fat", candidates=[len(s) for s in sets], groups=plan.k)
    return tour


def solve_fat_grouped(instance: Instance, eps: float,
                      inner_solver: Optional[Callable[[Instance, float], Tour]] = None,
                      order: Optional[Sequence[int]] = None) -> Tour:
    """Independent subproblems between representatives of groups of ceil(1/eps).

    ``order`` permutes the order in which subproblems are computed (the
    result does not depend on it).
    """
    if not 0 < eps <= 1:
        raise GeometryError("eps must be in (0, 1]")
    if instance.n == 0:
        return _straight(instance, method="fat-grouped")
    _check_fat(instance)
    solver = inner_solver or solve_fat
    s = math.ceil(1.0 / eps - 1e-12)
    plan = group_split(instance, s)
    pieces = {}
    todo = list(range(plan.k - 1)) if order is None else list(order)
    if sorted(todo) != list(range(plan.k - 1)):
        raise GeometryError("order must be a permutation of the subproblems")
    for t in todo:
        a, b = plan.reps[t], plan.reps[t + 1]
        sub = _sub_instance(instance, a, b, plan.anchors[t], plan.anchors[t + 1], True)
        pieces[t] = solver(sub, eps)
    pts = [plan.anchors[0]]
    for t in range(plan.k - 1):
        pts.extend(pieces[t].points[1:])
    tour = Tour.from_points(pts, method="fat-grouped", groups=plan.k, group_size=s)
    return tour


# ---------------------------------------------------------------------------
# balls


def eps_schedule(rank: int, n: int, eps: float) -> float:
    """Accuracy for the ball of the given radius rank (1 = largest).

    Larger balls can hold a larger share of OPT, so they get a finer budget:
    eps * (max(rank, 3) / n) ** (2/3), which never exceeds eps.
    """
    return eps * (max(rank, 3) / max(n, 3)) ** (2.0 / 3.0)


def _ball_points(ball: Ball, neighbors, eps_i: float) -> np.ndarray:
    pts = []
    for nb in neighbors:
        if np.array_equal(nb, ball.c):
            continue
        if ball.dim == 2:
            pts.append(nonuniform_disk_points(ball, nb, eps_i))
        else:
            pts.append(nonuniform_ball_points(ball, nb, eps_i))
    if not pts:
        # both neighbors sit at the center, so every direction is equivalent
        return _ball_points(ball, [ball.c + np.eye(ball.dim)[0]], eps_i)
    return np.concatenate(pts)


def _chord_point(ball: Ball, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Projection onto the ball of the point of segment ab closest to the
    center; it lies on ab whenever ab crosses the ball, so such a ball can be
    passed straight through."""
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else min(1.0, max(0.0, float((ball.c - a) @ ab) / denom))
    return ball.project(a + t * ab)


def solve_balls(instance: Instance, eps: float) -> Tour:
    """(1 + C eps)-approximation for disjoint balls with non-uniform points.

    A constant bound L comes from ``solve_fat`` at eps = 1.  The two largest
    balls get a uniform discretization inside the cube of side 2L around the
    start; the others get non-uniform points toward both neighbors at their
    scheduled accuracy.  Every ball also gets ``_chord_point`` for the
    segment joining its neighbors' centers.  ``info["eps_i"]`` lists the
    accuracy used per region.
    """
    if not 0 < eps < 1:
        raise GeometryError("eps must be in (0, 1)")
    if not instance.all_balls():
        raise GeometryError("solve_balls needs ball regions only")
    if not balls_disjoint(instance.regions):
        raise RefusedError("balls overlap")
    n = instance.n
    if n == 0:
        return _straight(instance, method="balls")
    acc = eps / BALL_ACCURACY
    bound = solve_fat(instance, 1.0).length
    radii = np.array([b.radius for b in instance.regions])
    order = sorted(range(n), key=lambda i: (-radii[i], i))
    rank = np.empty(n, dtype=int)
    rank[order] = np.arange(1, n + 1)
    centers = [instance.p_start] + [b.c for b in instance.regions] + [instance.p_end]
    box = WorkingBox(instance.p_start, 2 * bound if bound > 0 else 1.0)
    sets = []
    eps_used = []
    for i, ball in enumerate(instance.regions):
        neighbors = (centers[i], centers[i + 2])
        if rank[i] <= 2:
            eps_i = acc
            pts = [uniform_boundary_points(ball, box, acc).points,
                   _ball_points(ball, neighbors, acc)]
            pts = np.concatenate(pts)
        else:
            eps_i = eps_schedule(int(rank[i]), n, acc)
            pts = _ball_points(ball, neighbors, eps_i)
        pts = np.vstack([pts, _chord_point(ball, *neighbors)])
        sets.append(CandidateSet(i + 1, dedup(pts), eps_i))
        eps_used.append(eps_i)
    tour = solve_disjoint_dp(sets, instance.p_start, instance.p_end)
    tour.info.update(method="balls", candidates=[len(s) for s in sets], eps_i=eps_used,
                     ranks=rank.tolist(), constant_bound=bound)
    return tour


# ---------------------------------------------------------------------------
# rounding analysis


@dataclass
class RoundingBreakdown:
    offsets: np.ndarray
    along: np.ndarray
    extra1: np.ndarray
    extra2: np.ndarray
    flagged: List[int] = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(self.extra1.sum() + self.extra2.sum())


def rounding_error_decomposition(optimal: Tour, rounded: Tour,
                                 instance: Optional[Instance] = None) -> RoundingBreakdown:
    """Split length(rounded) - length(optimal) into first and second order terms.

    With o_i = p'_i - p_i and d_i = p'_{i+1} - p'_i:
    a_i = d_i . unit(p_{i+1} - p_i),
    extra1(i) = o_i . (unit(p_i - p_{i-1}) - unit(p_{i+1} - p_i)) for i = 1..n,
    extra2(i) = |d_i| - a_i for i = 0..n.
    When the endpoints agree, sum |d_i| = OPT + sum extra1 + sum extra2.
    Segments of zero length in ``optimal`` have no direction; their indices
    are listed in ``flagged`` and their unit vector is taken as zero.
    """
    p = np.asarray(optimal.points, dtype=float)
    q = np.asarray(rounded.points, dtype=float)
    if p.shape != q.shape:
        raise GeometryError("tours must have the same shape")
    if instance is not None and len(p) != instance.n + 2:
        raise GeometryError("tours do not match the instance")
    o = q - p
    seg = np.diff(p, axis=0)
    flagged = [i for i, s in enumerate(seg) if not np.any(s)]
    u = np.array([unit(s) for s in seg])
    dvec = np.diff(q, axis=0)
    along = np.einsum("ij,ij->i", dvec, u)
    extra1 = np.array([o[i] @ (u[i - 1] - u[i]) for i in range(1, len(p) - 1)])
    extra2 = np.linalg.norm(dvec, axis=1) - along
    return RoundingBreakdown(o, along, extra1, extra2, flagged)


def _has_fat_data(instance: Instance) -> bool:
    return all(instance.fat_meta(i) is not None for i in range(instance.n))


def choose_algorithm(instance: Instance, eps: float) -> str:
    """Balls scheme for disjoint balls, fat scheme for declared-disjoint
    regions with fatness data, convex unions otherwise."""
    if instance.n and instance.all_balls() and balls_disjoint(instance.regions) and eps < 1:
        return "balls"
    if instance.n and instance.disjoint and _has_fat_data(instance):
        return "fat"
    return "unions"


def solve(instance: Instance, eps: float, algorithm: str = "auto") -> Tour:
    """Dispatch to one of the approximation schemes by name."""
    if algorithm not in ALGORITHMS:
        raise GeometryError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    if algorithm == "auto":
        algorithm = choose_algorithm(instance, eps)
    if algorithm == "balls":
        tour = solve_balls(instance, eps)
    elif algorithm == "fat":
        tour = solve_fat(instance, eps)
    else:
        tour = solve_convex_unions(instance, eps)
    tour.info["algorithm"] = algorithm
    return tour


__all__ = [
    "solve", "choose_algorithm", "ALGORITHMS", "ApproxBracket", "GroupPlan", "RefusedError", "RoundingBreakdown", "trivial_approx",
    "pseudo_approx", "constant_approx", "solve_convex_unions", "group_split", "solve_fat",
    "solve_fat_grouped", "solve_balls", "eps_schedule", "balls_disjoint",
    "rounding_error_decomposition",
]
