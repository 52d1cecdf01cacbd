"""Exact dynamic programming over finite candidate sets.

``solve_disjoint_dp`` treats each region as the finite set of its
candidates and returns the optimal tour through one candidate per set.
``solve_intersecting_dp`` lets a candidate that already lies in the next
few regions jump straight past them.  ``monotone_transition`` is an
optional accelerator for one DP stage when both candidate sets are planar
convex polygons with disjoint hulls.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

import numpy as np

from .discretize import CandidateSet
from .geometry import DEFAULT_TOL, GeometryError, Region, Tour, as_point, tour_length

# Maximum number of matrix entries materialized per transition chunk.
CHUNK_ENTRIES = 4_000_000


class InfeasibleError(RuntimeError):
    """A candidate set is empty or no feasible chain of candidates exists."""


def _as_points(s) -> np.ndarray:
    pts = s.points if isinstance(s, CandidateSet) else s
    return np.asarray(pts, dtype=float).reshape(len(pts), -1) if len(pts) else np.zeros((0, 0))


def pairwise_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix ``D[i, j] = |b_i - a_j|``.

    Squared differences are accumulated coordinate by coordinate, so each
    entry is bit-identical to ``math.sqrt(sum((bi - aj) ** 2))`` evaluated
    left to right.
    """
    sq = np.zeros((len(b), len(a)))
    for c in range(a.shape[1]):
        diff = b[:, None, c] - a[None, :, c]
        sq += diff * diff
    return np.sqrt(sq)


def brute_transition(prev: np.ndarray, weights: np.ndarray, nxt: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Row minima of ``weights[j] + |prev_j - nxt_i|`` with lowest-index ties."""
    m = len(nxt)
    values = np.empty(m)
    args = np.empty(m, dtype=np.int64)
    step = max(1, CHUNK_ENTRIES // max(1, len(prev)))
    for lo in range(0, m, step):
        hi = min(m, lo + step)
        cost = weights[None, :] + pairwise_dist(prev, nxt[lo:hi])
        k = np.argmin(cost, axis=1)
        args[lo:hi] = k
        values[lo:hi] = cost[np.arange(hi - lo), k]
    return values, args


def _check_sets(sets) -> List[np.ndarray]:
    out = []
    for k, s in enumerate(sets):
        pts = _as_points(s)
        if len(pts) == 0:
            idx = s.region_index if isinstance(s, CandidateSet) else k + 1
            raise InfeasibleError(f"candidate set for region {idx} is empty")
        out.append(pts)
    return out


def solve_disjoint_dp(sets: Sequence, start, end, accelerate: bool = False) -> Tour:
    """Optimal tour start -> one point of each set (in order) -> end."""
    pts = _check_sets(sets)
    p0 = as_point(start)
    p1 = as_point(end, len(p0))
    stages = [p0[None, :]] + pts + [p1[None, :]]
    for s in stages:
        if s.shape[1] != len(p0):
            raise GeometryError("candidate dimension does not match start point")
    cost = np.zeros(1)
    parents: List[np.ndarray] = []
    for k in range(1, len(stages)):
        if accelerate and stages[k].shape[1] == 2:
            cost, arg = monotone_transition(stages[k - 1], cost, stages[k])
        else:
            cost, arg = brute_transition(stages[k - 1], cost, stages[k])
        parents.append(arg)
    # walk back from the end point
    chosen = [0]
    for arg in reversed(parents):
        chosen.append(int(arg[chosen[-1]]))
    chosen.reverse()
    tour_pts = np.array([stages[k][chosen[k]] for k in range(len(stages))])
    return Tour(tour_pts, tour_length(tour_pts),
                {"dp_length": float(cost[0]), "chosen": chosen[1:-1],
                 "candidates": [len(s) for s in pts]})


# ---------------------------------------------------------------------------
# intersecting regions


def successor(p, i: int, regions: Sequence[Region], tol: float = DEFAULT_TOL) -> int:
    """Smallest j > i with p outside R_j (1-based regions); n+1 if none.

    ``i = 0`` stands for the start point, which lies in no region.
    """
    n = len(regions)
    if not 0 <= i <= n:
        raise GeometryError(f"region index {i} out of range 0..{n}")
    p = as_point(p)
    if i >= 1 and not regions[i - 1].contains(p, tol):
        raise GeometryError(f"point is not in region {i}")
    for j in range(i + 1, n + 1):
        if not regions[j - 1].contains(p, tol):
            return j
    return n + 1


def _successors(points: np.ndarray, i: int, regions: Sequence[Region], tol: float) -> np.ndarray:
    """Vectorized ``successor`` for all points of stage ``i``."""
    n = len(regions)
    succ = np.full(len(points), n + 1, dtype=np.int64)
    open_ = np.ones(len(points), dtype=bool)
    for j in range(i + 1, n + 1):
        if not open_.any():
            break
        idx = np.nonzero(open_)[0]
        inside = regions[j - 1].contains(points[idx], tol)
        out = idx[~inside]
        succ[out] = j
        open_[out] = False
    return succ


def solve_intersecting_dp(sets: Sequence, regions: Sequence[Region], start, end,
                          tol: float = DEFAULT_TOL) -> Tour:
    """Optimal tour when candidates may cover several consecutive regions.

    A candidate of stage ``i`` whose successor is ``j`` transitions straight
    to stage ``j``; regions ``i+1 .. j-1`` are visited at the candidate.
    """
    pts = _check_sets(sets)
    n = len(regions)
    if len(pts) != n:
        raise GeometryError("need exactly one candidate set per region")
    p0 = as_point(start)
    p1 = as_point(end, len(p0))
    stages = [p0[None, :]] + pts + [p1[None, :]]
    succ = [_successors(stages[i], i, regions, tol) for i in range(n + 1)]
    best = [np.zeros(1)] + [None] * (n + 1)
    # parent of each candidate: (stage, index)
    parent: List[Optional[Tuple[np.ndarray, np.ndarray]]] = [None] * (n + 2)
    for j in range(1, n + 2):
        src_stage, src_idx, src_pts, src_w = [], [], [], []
        for i in range(j):
            sel = np.nonzero((succ[i] == j) & np.isfinite(best[i]))[0]
            if len(sel):
                src_stage.append(np.full(len(sel), i, dtype=np.int64))
                src_idx.append(sel)
                src_pts.append(stages[i][sel])
                src_w.append(best[i][sel])
        if not src_stage:
            best[j] = np.full(len(stages[j]), np.inf)
            parent[j] = (np.zeros(len(stages[j]), dtype=np.int64) - 1,
                         np.zeros(len(stages[j]), dtype=np.int64) - 1)
            continue
        st = np.concatenate(src_stage)
        ix = np.concatenate(src_idx)
        values, arg = brute_transition(np.concatenate(src_pts), np.concatenate(src_w), stages[j])
        best[j] = values
        parent[j] = (st[arg], ix[arg])
    if not np.isfinite(best[n + 1][0]):
        raise InfeasibleError("no chain of candidates reaches the end point")
    tour_pts = [None] * (n + 2)
    chosen = [0] * (n + 2)
    j, t = n + 1, 0
    tour_pts[j] = stages[j][t]
    while j > 0:
        s, u = int(parent[j][0][t]), int(parent[j][1][t])
        for k in range(s, j):
            tour_pts[k] = stages[s][u]
            chosen[k] = -1
        chosen[s] = u
        j, t = s, u
    tour_pts = np.array(tour_pts)
    return Tour(tour_pts, tour_length(tour_pts),
                {"dp_length": float(best[n + 1][0]), "chosen": chosen[1:-1],
                 "candidates": [len(s) for s in pts]})


# ---------------------------------------------------------------------------
# monotone row minima between two disjoint convex polygons


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def ccw_hull_indices(pts: np.ndarray) -> List[int]:
    """Indices of strict hull vertices in counterclockwise order."""
    idx = sorted(range(len(pts)), key=lambda i: (pts[i, 0], pts[i, 1]))
    if len(idx) < 3:
        return idx
    lower: List[int] = []
    upper: List[int] = []
    for i in idx:
        while len(lower) >= 2 and _cross(pts[lower[-2]], pts[lower[-1]], pts[i]) <= 0:
            lower.pop()
        lower.append(i)
    for i in reversed(idx):
        while len(upper) >= 2 and _cross(pts[upper[-2]], pts[upper[-1]], pts[i]) <= 0:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def _convex_order(pts: np.ndarray) -> Optional[List[int]]:
    """CCW order when every point is a strict hull vertex, else None."""
    if len(pts) < 3:
        return None
    h = ccw_hull_indices(pts)
    return h if len(h) == len(pts) else None


def _separated(a: np.ndarray, b: np.ndarray) -> bool:
    """Separating-axis test for two convex polygons given in ccw order."""
    for poly in (a, b):
        edges = np.roll(poly, -1, axis=0) - poly
        normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)
        pa = a @ normals.T
        pb = b @ normals.T
        if np.any((pa.max(0) < pb.min(0)) | (pb.max(0) < pa.min(0))):
            return True
    return False


def _monge_row_minima(cols: np.ndarray, weights: np.ndarray, rows: np.ndarray):
    """Divide-and-conquer row minima assuming leftmost argmins are monotone."""
    m = len(rows)
    values = np.empty(m)
    args = np.empty(m, dtype=np.int64)
    stack = [(0, m - 1, 0, len(cols) - 1)]
    while stack:
        r0, r1, c0, c1 = stack.pop()
        if r0 > r1:
            continue
        mid = (r0 + r1) // 2
        row = weights[c0:c1 + 1] + pairwise_dist(cols[c0:c1 + 1], rows[mid:mid + 1])[0]
        k = int(np.argmin(row))
        values[mid] = row[k]
        args[mid] = c0 + k
        stack.append((r0, mid - 1, c0, c0 + k))
        stack.append((mid + 1, r1, c0 + k, c1))
    return values, args


def _outer_chains(a: np.ndarray, b: np.ndarray):
    """Split both polygons into the chain on hull(A ∪ B) and the rest.

    Returns ccw index lists (a_out, a_in, b_out, b_in), with a_out followed
    by b_out in counterclockwise order around the common hull.
    """
    both = np.vstack([a, b])
    na = len(a)
    h = ccw_hull_indices(both)
    is_a = [i < na for i in h]
    if all(is_a) or not any(is_a):
        return None
    s = next(t for t in range(len(h)) if is_a[t] and not is_a[t - 1])
    h = h[s:] + h[:s]
    a_out = [i for i in h if i < na]
    b_out = [i - na for i in h if i >= na]

    def rest(count, out):
        on = set(out)
        last = out[-1]
        return [(last + q) % count for q in range(1, count) if (last + q) % count not in on]

    return a_out, rest(na, a_out), b_out, rest(len(b), b_out)


def monotone_transition(prev, weights, nxt) -> Tuple[np.ndarray, np.ndarray]:
    """Minima of ``weights[j] + |prev_j - nxt_i|`` for every ``nxt_i``.

    When both sets are planar polygons in convex position with disjoint
    hulls, the block pairing their chains on the common hull satisfies the
    quadrangle inequality (any two points of each chain form a convex
    quadrilateral), so its row minima come from a monotone divide and
    conquer.  The remaining blocks are handled exhaustively.  Any other input
    falls back to the exhaustive transition.  The returned values equal the
    exhaustive ones exactly; under exact ties the reported minimizer may
    differ from the lowest index.
    """
    a = _as_points(prev)
    b = _as_points(nxt)
    w = np.asarray(weights, dtype=float)
    if len(w) != len(a):
        raise GeometryError("need one weight per previous candidate")
    if a.shape[1] != 2 or b.shape[1] != 2:
        return brute_transition(a, w, b)
    oa, ob = _convex_order(a), _convex_order(b)
    if oa is None or ob is None or not _separated(a[oa], b[ob]):
        return brute_transition(a, w, b)
    chains = _outer_chains(a[oa], b[ob])
    if chains is None:
        return brute_transition(a, w, b)
    a_out, a_in, b_out, b_in = ([o[k] for k in c] for o, c in zip((oa, oa, ob, ob), chains))

    values = np.full(len(b), np.inf)
    args = np.full(len(b), len(a), dtype=np.int64)

    def merge(rows, cols, v, k):
        rows = np.asarray(rows, dtype=np.int64)
        cand = np.asarray(cols, dtype=np.int64)[k]
        better = (v < values[rows]) | ((v == values[rows]) & (cand < args[rows]))
        values[rows[better]] = v[better]
        args[rows[better]] = cand[better]

    rows_rev = b_out[::-1]
    v, k = _monge_row_minima(a[a_out], w[a_out], b[rows_rev])
    merge(rows_rev, a_out, v, k)
    for rows, cols in ((b_out, a_in), (b_in, a_out), (b_in, a_in)):
        if rows and cols:
            v, k = brute_transition(a[cols], w[cols], b[rows])
            merge(rows, cols, v, k)
    return values, args


__all__ = [
    "InfeasibleError", "pairwise_dist", "brute_transition", "solve_disjoint_dp",
    "successor", "solve_intersecting_dp", "monotone_transition", "ccw_hull_indices",
]
