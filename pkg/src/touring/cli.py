"""Command-line entry points: ``touring solve|certify|plot|bench|generate``.

Exit codes: 0 success, 2 unreadable or malformed input (the message names
the location), 3 the instance is outside what the chosen algorithm accepts
(size guard, refused precondition, no feasible candidates).
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .approx import ALGORITHMS, RefusedError, solve
from .bench import grid, run_bench, to_csv
from .certify import GuardError, dual_certificate, refine_local, reflection_residual
from .dp import InfeasibleError
from .generators import (RADIUS_LAWS, gen_random_disjoint_balls, gen_tangent_construction,
                         line_reflection_instance, two_disk_reflection_instance)
from .geometry import GeometryError, Instance, Tour, tour_violations
from .instance_io import (InstanceFormatError, ResultFile, format_instance, format_result,
                          read_instance, read_result)
from .plot import render_svg

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
DEFAULT_EPS = 0.1
GENERATORS = ("random", "tangent", "line", "two-disk")


def _load_instance(path) -> Instance:
    try:
        return read_instance(path)
    except OSError as exc:
        raise InstanceFormatError(exc.strerror or str(exc), str(path)) from exc
    except InstanceFormatError as exc:
        raise InstanceFormatError(str(exc), str(path)) from exc


def _load_result(path) -> ResultFile:
    try:
        return read_result(path)
    except OSError as exc:
        raise InstanceFormatError(exc.strerror or str(exc), str(path)) from exc
    except InstanceFormatError as exc:
        raise InstanceFormatError(str(exc), str(path)) from exc


def _dual_bound(instance: Instance, tour: Tour) -> float:
    """Lower bound on OPT from the dual certificate of a locally refined copy
    of ``tour`` (any tour yields a valid bound; refinement tightens it)."""
    refined = refine_local(instance, tour)
    return dual_certificate(instance, refined).bound


def cmd_solve(instance: Instance, eps: Optional[float] = None, algorithm: str = "auto",
              certify: bool = False) -> ResultFile:
    if eps is None:
        eps = instance.eps if instance.eps is not None else DEFAULT_EPS
    t0 = time.perf_counter()
    tour = solve(instance, eps, algorithm)
    wall = time.perf_counter() - t0
    lower = ratio = None
    if certify and instance.all_balls():
        lower = min(_dual_bound(instance, tour), tour.length)
        ratio = tour.length / lower if lower > 0 else (1.0 if tour.length == 0 else math.inf)
    return ResultFile(tour.points, tour.length, lower, ratio,
                      list(tour.info.get("candidates", [])), wall,
                      tour.info.get("algorithm", algorithm), eps)


@dataclass
class CertifyReport:
    valid: bool
    violations: List[int] = field(default_factory=list)
    endpoints_ok: bool = True
    residual: Optional[float] = None
    bound: Optional[float] = None
    ratio: Optional[float] = None

    def lines(self) -> List[str]:
        out = [f"valid: {'yes' if self.valid else 'no'}"]
        if not self.endpoints_ok:
            out.append("endpoints: tour does not start and end at the instance endpoints")
        if self.violations:
            out.append("regions missed: " + ", ".join(str(i) for i in self.violations))
        if self.residual is not None:
            out.append(f"reflection residual: {self.residual:.3e}")
        if self.bound is not None:
            out.append(f"dual bound: {self.bound!r}")
        if self.ratio is not None:
            out.append(f"ratio upper bound: {self.ratio!r}")
        if self.bound is None:
            out.append("certificate: validity only (non-ball regions)")
        return out


def cmd_certify(instance: Instance, result: ResultFile, tol: float = 1e-6) -> CertifyReport:
    tour = Tour(np.asarray(result.tour, dtype=float), result.length)
    if len(tour.points) != instance.n + 2:
        raise InstanceFormatError(
            f"tour has {len(tour.points)} points, instance needs {instance.n + 2}", "$.tour")
    if tour.points.shape[1] != instance.dim:
        raise InstanceFormatError("tour dimension differs from the instance", "$.tour")
    ends = bool(np.allclose(tour.points[0], instance.p_start, atol=tol)
                and np.allclose(tour.points[-1], instance.p_end, atol=tol))
    bad = tour_violations(instance, tour, tol)
    report = CertifyReport(ends and not bad, bad, ends)
    if instance.n == 0:
        report.ratio = 1.0
        return report
    if instance.all_balls() and report.valid:
        report.residual = reflection_residual(instance, tour).max_residual
        report.bound = dual_certificate(instance, tour).bound
        if report.bound > 0:
            report.ratio = tour.length / report.bound
    return report


def cmd_plot(instance: Instance, result: Optional[ResultFile] = None, title: str = "") -> str:
    tour = result.to_tour() if result is not None else None
    return render_svg(instance, tour, title)


def cmd_bench(ns: Sequence[int], epss: Sequence[float], algorithms: Sequence[str] = ("balls",),
              d: int = 2, seed: int = 0) -> str:
    return to_csv(run_bench(grid(ns, epss, algorithms, d, seed)))


def cmd_generate(kind: str, n: int = 10, d: int = 2, seed: int = 0,
                 radius_law: str = "unit") -> Instance:
    if kind == "random":
        return gen_random_disjoint_balls(n, d, seed=seed, radius_law=radius_law)
    if kind == "tangent":
        return gen_tangent_construction(n)
    if kind == "line":
        return line_reflection_instance()
    if kind == "two-disk":
        return two_disk_reflection_instance()
    raise GeometryError(f"unknown generator {kind!r}; expected one of {GENERATORS}")


# ---------------------------------------------------------------------------
# argument handling


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="touring",
                                     description="Approximate shortest tours through ordered regions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="approximate a tour and write a result file")
    p.add_argument("instance")
    p.add_argument("--eps", type=float, default=None,
                   help=f"accuracy; default from the instance, else {DEFAULT_EPS}")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="auto")
    p.add_argument("--certify", action="store_true",
                   help="add a dual lower bound and ratio (ball instances)")
    p.add_argument("--out", help="result file (default: stdout)")

    p = sub.add_parser("certify", help="check a result file against its instance")
    p.add_argument("instance")
    p.add_argument("result")
    p.add_argument("--out", help="report file (default: stdout)")

    p = sub.add_parser("plot", help="draw a planar instance and tour as SVG")
    p.add_argument("instance")
    p.add_argument("result", nargs="?")
    p.add_argument("--out", help="SVG file (default: stdout)")

    p = sub.add_parser("bench", help="time the solvers on random disjoint balls, CSV output")
    p.add_argument("--n", type=int, nargs="*", default=[10, 100, 1000])
    p.add_argument("--eps", type=float, nargs="*", default=[0.04])
    p.add_argument("--algorithm", nargs="*", choices=ALGORITHMS, default=["balls"])
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV file (default: stdout)")

    p = sub.add_parser("generate", help="write a generated instance")
    p.add_argument("kind", choices=GENERATORS)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius-law", choices=RADIUS_LAWS, default="unit")
    p.add_argument("--eps", type=float, default=None, help="default accuracy stored in the file")
    p.add_argument("--out", help="instance file (default: stdout)")
    return parser


def _run(args) -> int:
    if args.command == "solve":
        res = cmd_solve(_load_instance(args.instance), args.eps, args.algorithm, args.certify)
        _emit(format_result(res), args.out)
        if args.out:
            print(f"length {res.length!r} ({res.algorithm}, {res.wall_time:.3f} s)")
    elif args.command == "certify":
        report = cmd_certify(_load_instance(args.instance), _load_result(args.result))
        _emit("\n".join(report.lines()) + "\n", args.out)
    elif args.command == "plot":
        inst = _load_instance(args.instance)
        res = _load_result(args.result) if args.result else None
        _emit(cmd_plot(inst, res), args.out)
    elif args.command == "bench":
        _emit(cmd_bench(args.n, args.eps, args.algorithm, args.dim, args.seed), args.out)
    elif args.command == "generate":
        inst = cmd_generate(args.kind, args.n, args.dim, args.seed, args.radius_law)
        if args.eps is not None:
            inst = Instance(inst.start, inst.end, inst.regions, inst.fat, inst.disjoint, args.eps)
        _emit(format_instance(inst), args.out)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GuardError, RefusedError, InfeasibleError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
