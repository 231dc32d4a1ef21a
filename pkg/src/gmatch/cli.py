"""Command line: ``gmatch match | bench | convergence``.

Exit codes: 0 success (non-convergence included), 2 bad arguments,
3 I/O or parse errors.  Output files are written atomically.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

import numpy as np

from gmatch.core import Graph, ValidationError, excess_error, make_problem
from gmatch.discretize import greedy_discretize
from gmatch.ingest import (
    FormatError,
    atomic_write,
    load_adjacency,
    load_points,
    points_to_graph,
    save_assignment,
)
from gmatch.solvers import SOLVERS, SolverConfig, solve
from gmatch.synthetic import CASES, case_instance

log = logging.getLogger("gmatch")

EXIT_USAGE = 2
EXIT_IO = 3

BENCH_COLUMNS = [
    "solver", "n", "n_prime", "recipe", "iterations",
    "wall_time_s", "edge_error", "total_error", "excess_error",
]
CONVERGENCE_COLUMNS = [
    "section", "solver", "alpha", "iteration", "residual",
    "objective", "wall_time_s", "total_error",
]


class UsageError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return vals


def _float_list(text):
    try:
        vals = [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _solver_list(text):
    names = [t for t in text.split(",") if t]
    bad = [t for t in names if t not in SOLVERS]
    if bad or not names:
        raise argparse.ArgumentTypeError(
            f"unknown solver(s) {bad}; choose from {sorted(SOLVERS)}"
        )
    return names


def _add_solver_options(p):
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--eps1", type=float, default=1e-4)
    p.add_argument("--eps2", type=float, default=1e-4)
    p.add_argument("--max-outer", type=_positive_int, default=300)
    p.add_argument("--max-inner", type=_positive_int, default=300)


def _config(args, **overrides) -> SolverConfig:
    base = dict(
        alpha=args.alpha, eps1=args.eps1, eps2=args.eps2,
        max_outer=args.max_outer, max_inner=args.max_inner,
    )
    base.update(overrides)
    try:
        return SolverConfig(**base)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmatch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("match", help="match two graphs from files")
    m.add_argument("--graph-a")
    m.add_argument("--graph-b")
    m.add_argument("--points-a")
    m.add_argument("--points-b")
    m.add_argument("--features-a", help="node features, points-file layout")
    m.add_argument("--features-b")
    m.add_argument("--solver", choices=sorted(SOLVERS), default="fastpfp")
    _add_solver_options(m)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_match)

    b = sub.add_parser("bench", help="synthetic random-graph benchmark")
    b.add_argument("--case", choices=list(CASES), required=True)
    b.add_argument("--sizes", type=_int_list, default=[100, 200, 300, 400, 500])
    b.add_argument("--trials", type=_positive_int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--density", type=float, default=0.5)
    b.add_argument("--solvers", type=_solver_list, default=["fastpfp", "fastga", "pg"])
    _add_solver_options(b)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("convergence", help="per-iteration residual traces and alpha sweep")
    c.add_argument("--graph-a", required=True)
    c.add_argument("--graph-b", required=True)
    c.add_argument("--solvers", type=_solver_list, default=["fastpfp", "fastga"])
    c.add_argument("--alphas", type=_float_list)
    c.add_argument("--iters", type=_positive_int, default=20)
    _add_solver_options(c)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_convergence)
    return parser


def _load_side(graph_path, points_path, features_path, side):
    if graph_path and points_path:
        raise UsageError(f"give either --graph-{side} or --points-{side}, not both")
    if graph_path:
        g = load_adjacency(graph_path)
    elif points_path:
        g = points_to_graph(load_points(points_path))
    else:
        raise UsageError(f"one of --graph-{side} or --points-{side} is required")
    if features_path:
        g = Graph(g.adjacency, load_points(features_path))
    return g


def cmd_match(args) -> int:
    g = _load_side(args.graph_a, args.points_a, args.features_a, "a")
    g_prime = _load_side(args.graph_b, args.points_b, args.features_b, "b")
    cfg = _config(args)
    if args.lam < 0:
        raise UsageError("--lambda must be nonnegative")
    problem, swapped = make_problem(g, g_prime, args.lam)
    soft, report = solve(problem, args.solver, cfg)
    assignment = greedy_discretize(soft.x)
    save_assignment(assignment, report, args.out, extra={"swapped": int(swapped)})
    print(
        f"solver={args.solver} n={problem.n} n_prime={problem.n_prime} "
        f"iterations={report.iterations} wall_time={report.wall_time:.6f} "
        f"total_error={report.total_error:.17g}"
        + (" swapped=1" if swapped else "")
    )
    return 0


def instance_seed(seed: int, n: int, trial: int) -> int:
    """Per-(size, trial) seed derived from the run seed."""
    return int(np.random.SeedSequence([seed, n, trial]).generate_state(1, np.uint64)[0])


def _write_csv(path, columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    atomic_write(path, buf.getvalue())


def _num(v):
    return "" if v is None else f"{float(v):.17g}"


def cmd_bench(args) -> int:
    if not 0.0 < args.density < 1.0:
        raise UsageError("--density must lie in (0, 1)")
    cfg = _config(args)
    rows = []
    for n in args.sizes:
        for trial in range(args.trials):
            try:
                inst = case_instance(args.case, n, instance_seed(args.seed, n, trial), args.density)
            except ValidationError as exc:
                raise UsageError(str(exc)) from None
            p = inst.problem
            for name in args.solvers:
                soft, report = solve(p, name, cfg)
                a = greedy_discretize(soft.x)
                exc_err = excess_error(p, a, inst.ground_truth)
                log.info("%s n=%d trial=%d excess=%g time=%.3fs", name, n, trial, exc_err, report.wall_time)
                rows.append([
                    name, p.n, p.n_prime, str(inst.recipe), report.iterations,
                    _num(report.wall_time), _num(report.edge_error),
                    _num(report.total_error), _num(exc_err),
                ])
    _write_csv(args.out, BENCH_COLUMNS, rows)
    return 0


def cmd_convergence(args) -> int:
    g = load_adjacency(args.graph_a)
    g_prime = load_adjacency(args.graph_b)
    if args.lam < 0:
        raise UsageError("--lambda must be nonnegative")
    problem, _ = make_problem(g, g_prime, args.lam)
    rows = []
    # run a fixed number of iterations: only an exactly zero residual stops early
    trace_cfg = _config(args, max_outer=args.iters, eps1=sys.float_info.min)
    for name in args.solvers:
        _, report = solve(problem, name, trace_cfg)
        for t, (res, obj) in enumerate(zip(report.residuals, report.objective_trace), 1):
            rows.append(["trace", name, _num(trace_cfg.alpha), t, _num(res), _num(obj), "", ""])
    for alpha in args.alphas or []:
        for name in args.solvers:
            if name == "fastga":
                continue
            cfg = _config(args, alpha=alpha)
            _, report = solve(problem, name, cfg)
            rows.append([
                "alpha", name, _num(alpha), report.iterations, _num(report.residuals[-1]),
                _num(report.objective_trace[-1]), _num(report.wall_time), _num(report.total_error),
            ])
    _write_csv(args.out, CONVERGENCE_COLUMNS, rows)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gmatch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, FormatError, ValidationError) as exc:
        print(f"gmatch: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
