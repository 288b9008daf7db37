"""Command-line driver: solve a program file or benchmark a directory.

Usage:
  casp FILE [options]          solve one program
  casp bench DIR [options]     run the filter matrix over a directory of
                               programs, emit CSV plus heat-map images

Solve mode prints each model as an `Answer: i` header followed by the shown
atoms (regular atoms, then true constraint atoms) and the `var=value` witness
pairs, then a final SATISFIABLE / UNSATISFIABLE / OPTIMUM FOUND verdict.
Exit status is 0 for completed runs (including unsatisfiable ones), 2 for
input errors (unreadable file, parse or grounding failure), 1 for internal
errors.  The environment variable CASP_SEED fixes heuristic tie-breaking.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import traceback
from pathlib import Path
from typing import List, Optional

from . import bench as benchlib
from .driver import OPTIMUM_FOUND, Result, Solver, SolverConfig
from .grounder import GroundingError, ground_text
from .parser import ParseError
from .translate import TranslateError

FILTER_CHOICES = ("simple", "deletion", "forward", "backward", "range", "cc", "ccrange")


def _seed_from_env() -> int:
    raw = os.environ.get("CASP_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        return 0


def _solve_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casp",
        description="Constraint answer set solver with conflict/reason filtering.",
    )
    parser.add_argument("file", help="program file to solve")
    parser.add_argument(
        "-n",
        "--models",
        type=int,
        default=1,
        metavar="K",
        help="number of models to compute, 0 for all (default 1)",
    )
    parser.add_argument(
        "--csp-reduce-conflict",
        choices=FILTER_CHOICES,
        default="simple",
        metavar="FILTER",
        help="conflict filtering method (default simple): " + ", ".join(FILTER_CHOICES),
    )
    parser.add_argument(
        "--csp-reduce-reason",
        choices=FILTER_CHOICES,
        default="simple",
        metavar="FILTER",
        help="reason filtering method (default simple)",
    )
    parser.add_argument(
        "--csp-prop-delay",
        type=int,
        default=1,
        metavar="N",
        help="theory propagation every N'th call; 0 = only on total assignments (default 1)",
    )
    parser.add_argument(
        "--csp-initial-lookahead",
        action="store_true",
        help="derive unary/binary constraint nogoods by probing before search",
    )
    parser.add_argument(
        "--csp-probe-entail",
        action="store_true",
        help="decide entailment by probing when interval reasoning is inconclusive",
    )
    parser.add_argument(
        "--csp-opt-val",
        type=int,
        default=None,
        metavar="V",
        help="start optimization from objective bound V",
    )
    parser.add_argument(
        "--csp-opt-all",
        action="store_true",
        help="also keep models matching the current best objective",
    )
    parser.add_argument(
        "--enum-witnesses",
        action="store_true",
        help="count distinct constraint-variable witnesses per Boolean model",
    )
    parser.add_argument(
        "--timeout",
        type=float,
        default=None,
        metavar="SEC",
        help="abort the solve after SEC seconds (status UNKNOWN)",
    )
    parser.add_argument(
        "--text",
        action="store_true",
        help="print the ground program instead of solving",
    )
    parser.add_argument("--stats", action="store_true", help="print run statistics")
    parser.add_argument(
        "--csv",
        metavar="PATH",
        default=None,
        help="append one statistics row for this run to PATH",
    )
    return parser


def _bench_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="casp bench",
        description="Run every reason/conflict filter pair over a directory of programs.",
    )
    parser.add_argument("dir", help="directory containing .lp program files")
    parser.add_argument(
        "--csv",
        metavar="PATH",
        default="bench.csv",
        help="output CSV path (default bench.csv); heat maps go next to it",
    )
    parser.add_argument(
        "--timeout",
        type=float,
        default=10.0,
        metavar="SEC",
        help="per-instance time limit in seconds (default 10)",
    )
    parser.add_argument(
        "--csp-prop-delay",
        type=int,
        default=1,
        metavar="N",
        help="theory propagation delay used for every configuration",
    )
    parser.add_argument(
        "--csp-initial-lookahead",
        action="store_true",
        help="enable initial lookahead for every configuration",
    )
    parser.add_argument(
        "--text",
        action="store_true",
        help="also print normalized percent-of-worst matrices",
    )
    parser.add_argument(
        "--no-figures",
        action="store_true",
        help="skip rendering heat-map images",
    )
    return parser


def _config_from_args(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        conflict_filter=args.csp_reduce_conflict,
        reason_filter=args.csp_reduce_reason,
        delay=args.csp_prop_delay,
        lookahead=args.csp_initial_lookahead,
        probe_entail=args.csp_probe_entail,
        opt_all=args.csp_opt_all,
        opt_val=args.csp_opt_val,
        max_models=args.models,
        enum_witnesses=args.enum_witnesses,
        seed=_seed_from_env(),
        timeout=args.timeout,
    )


def _print_model(model) -> None:
    print(f"Answer: {model.index}")
    print(" ".join(model.shown()))
    if model.assignment:
        print(" ".join(f"{name}={value}" for name, value in model.assignment.items()))
    if model.objective is not None:
        print("Optimization: " + " ".join(str(v) for v in model.objective))


def _print_stats(result: Result) -> None:
    stats = result.stats
    print()
    print(f"Models       : {stats.models}")
    print(f"Decisions    : {stats.decisions}")
    print(
        f"Conflicts    : {stats.conflicts} "
        f"(avg size {stats.avg_conflict_size:.2f}, restarts {stats.restarts})"
    )
    print(f"Propagations : {stats.propagations} boolean, {stats.theory_propagations} theory")
    print(
        f"Filter calls : {stats.conflict_filter_calls} conflict, "
        f"{stats.reason_filter_calls} reason"
    )
    print(f"Oracle       : {stats.oracle_checks} checks, {stats.oracle_rebuilds} rebuilds")
    print(f"Total checks : {stats.total_checks}")
    print(
        f"Time         : {stats.solve_time:.3f}s solve, "
        f"{stats.filter_time:.3f}s filtering"
    )


def _append_stats_csv(path: str, source: str, result: Result) -> None:
    row = {"file": source, "status": result.status}
    row.update(result.stats.as_dict())
    target = Path(path)
    fresh = not target.exists() or target.stat().st_size == 0
    with target.open("a", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(row), lineterminator="\n")
        if fresh:
            writer.writeheader()
        writer.writerow(row)


def _run_solve(args: argparse.Namespace) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        print(f"error: cannot read {args.file}: {exc}", file=sys.stderr)
        return 2
    try:
        if args.text:
            print(ground_text(text).to_text(), end="")
            return 0
        solver = Solver(text, _config_from_args(args))
        result = solver.run()
    except (ParseError, GroundingError, TranslateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for model in result.models:
        _print_model(model)
    print(result.status)
    if result.status == OPTIMUM_FOUND and result.optimum is not None:
        print("Optimum: " + " ".join(str(v) for v in result.optimum))
    if args.stats:
        _print_stats(result)
    if args.csv:
        _append_stats_csv(args.csv, args.file, result)
    return 0


def _run_bench(args: argparse.Namespace) -> int:
    root = Path(args.dir)
    if not root.is_dir():
        print(f"error: not a directory: {args.dir}", file=sys.stderr)
        return 2
    files = sorted(root.glob("*.lp"))
    if not files:
        print(f"error: no .lp files in {args.dir}", file=sys.stderr)
        return 2
    texts = []
    for path in files:
        try:
            texts.append(path.read_text())
        except OSError as exc:
            print(f"error: cannot read {path}: {exc}", file=sys.stderr)
            return 2

    def progress(row) -> None:
        print(
            f"{benchlib.FILTER_LETTERS[row.reason]}/{benchlib.FILTER_LETTERS[row.conflict]}: "
            f"avg_time={row.avg_time:.3f}s avg_conflict_size={row.avg_conflict_size:.2f} "
            f"timeouts={row.timeouts}",
            file=sys.stderr,
        )

    rows = benchlib.run_matrix(
        texts,
        timeout=args.timeout,
        seed=_seed_from_env(),
        delay=args.csp_prop_delay,
        lookahead=args.csp_initial_lookahead,
        progress=progress,
    )
    benchlib.write_csv(rows, args.csv)
    print(f"wrote {args.csv}")
    if not args.no_figures:
        for image in benchlib.render_heatmaps(rows, args.csv):
            print(f"wrote {image}")
    if args.text:
        print(benchlib.format_matrix(rows, "avg_time"))
        print(benchlib.format_matrix(rows, "avg_conflict_size"))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "bench":
            return _run_bench(_bench_parser().parse_args(argv[1:]))
        return _run_solve(_solve_parser().parse_args(argv))
    except SystemExit:
        raise
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
