"""Benchmark grids over random disjoint-ball instances, emitted as CSV."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from itertools import product
from typing import Iterable, List, Sequence

from .approx import solve
from .certify import dual_certificate
from .generators import gen_random_disjoint_balls

CSV_FIELDS = ("n", "d", "eps", "algorithm", "seed", "candidates", "max_candidates",
              "wall_time", "length", "bound")


@dataclass(frozen=True)
class BenchCell:
    n: int
    eps: float
    algorithm: str = "balls"
    d: int = 2
    seed: int = 0


@dataclass
class BenchRow:
    n: int
    d: int
    eps: float
    algorithm: str
    seed: int
    candidates: int
    max_candidates: int
    wall_time: float
    length: float
    bound: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in CSV_FIELDS}


def grid(ns: Iterable[int], epss: Iterable[float], algorithms: Sequence[str] = ("balls",),
         d: int = 2, seed: int = 0) -> List[BenchCell]:
    """Cells in n-major, then eps, then algorithm order."""
    return [BenchCell(int(n), float(e), a, d, seed) for n, e, a in product(ns, epss, algorithms)]


def run_cell(cell: BenchCell) -> BenchRow:
    """Solve one random instance; ``bound`` is the dual lower bound of the tour
    (valid for balls only, NaN otherwise)."""
    inst = gen_random_disjoint_balls(cell.n, cell.d, seed=cell.seed)
    t0 = time.perf_counter()
    tour = solve(inst, cell.eps, cell.algorithm)
    wall = time.perf_counter() - t0
    cands = tour.info.get("candidates", [])
    bound = dual_certificate(inst, tour).bound if inst.all_balls() else float("nan")
    return BenchRow(cell.n, cell.d, cell.eps, tour.info.get("algorithm", cell.algorithm),
                    cell.seed, int(sum(cands)), int(max(cands, default=0)), wall,
                    tour.length, bound)


def run_bench(cells: Iterable[BenchCell]) -> List[BenchRow]:
    """Cells run one after another so that wall times are not perturbed by
    each other."""
    return [run_cell(c) for c in cells]


def to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_dict())
    return buf.getvalue()


__all__ = ["BenchCell", "BenchRow", "CSV_FIELDS", "grid", "run_cell", "run_bench", "to_csv"]
