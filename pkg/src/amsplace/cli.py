"""Command line entry point: ``amsplace {generate,solve,mh,evaluate,render}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .core.io import read_instance, read_placement, write_instance
from .generate import GenSpec, SpecError, generate
from .harness.experiment import ExperimentConfig, read_results, run_experiment
from .harness.metrics import summary_lines, table_from_records
from .harness.render import render_svg


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance", type=Path)
    p.add_argument("--cc", type=float, default=1.0, help="connectivity weight c_C (c_A is 1)")
    p.add_argument("--budget-s", type=float, default=60.0, help="total wall-clock budget in seconds")
    p.add_argument("--sb", action="store_true", help="add symmetry-breaking rows to the full model")
    p.add_argument("--wh-slack", type=float, default=None,
                   help="bound W+H by (1+slack) times the reference placement's W+H")
    p.add_argument("--reference", type=str, default=None, help="reference placement for --wh-slack")
    p.add_argument("--feasibility", action="store_true", help="favour finding incumbents in full solves")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=Path("out"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amsplace", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sym", action="store_true", help="add symmetry groups")
    g.add_argument("--groups", type=int, default=3)
    g.add_argument("--blockages", type=int, default=0)
    g.add_argument("--name", default=None)
    g.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("solve", help="full-model solve, optionally warm-started by FDGD")
    _common(s)
    s.add_argument("--mode", choices=("ilp", "fdgd-ilp"), default="fdgd-ilp")

    m = sub.add_parser("mh", help="initial solve followed by the matheuristic")
    _common(m)
    m.add_argument("--g", type=int, default=10)
    m.add_argument("--diversify", action="store_true")
    m.add_argument("--no-warm-start", action="store_true", help="initial phase without FDGD")
    m.add_argument("--step-s", type=float, default=10.0, help="time limit per restricted solve")
    m.add_argument("--initial", type=str, default=None, help="start from this placement instead")
    m.add_argument("--max-iters", type=int, default=None)
    m.add_argument("--logical-clock", action="store_true",
                   help="stamp trace events with the iteration index instead of seconds")

    e = sub.add_parser("evaluate", help="aRD and best hits over results tables")
    e.add_argument("results", type=Path, nargs="+")

    r = sub.add_parser("render", help="draw a placement as SVG")
    r.add_argument("instance", type=Path)
    r.add_argument("placement", type=Path)
    r.add_argument("--out", type=Path, required=True)
    r.add_argument("--nets", action="store_true")
    return parser


def _experiment(args, **kw) -> int:
    cfg = ExperimentConfig(
        c_C=args.cc, total_budget=args.budget_s, symmetry_breaking=args.sb,
        wh_slack=args.wh_slack, reference=args.reference, seed=args.seed,
        threads=args.threads, feasibility_emphasis=args.feasibility, **kw,
    )
    rec = run_experiment(args.instance, cfg, args.out_dir)
    print(",".join(rec.header()))
    print(",".join(rec.row()))
    return 0 if rec.status == "ok" else 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "generate":
        try:
            spec = GenSpec(args.n, seed=args.seed, with_symmetry=args.sym,
                           symmetry_groups=args.groups, blockages=args.blockages, name=args.name)
        except SpecError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        write_instance(generate(spec), args.out)
        return 0
    if args.command == "solve":
        return _experiment(args, mode=args.mode)
    if args.command == "mh":
        return _experiment(
            args, mode="mh", g=args.g, step_time_limit=args.step_s,
            mh_variant="no-warm-start" if args.no_warm_start else ("diversify" if args.diversify else "plain"),
            initial=args.initial, max_iterations=args.max_iters, logical_clock=args.logical_clock,
        )
    if args.command == "evaluate":
        records = [rec for path in args.results for rec in read_results(path)]
        print("\n".join(summary_lines(table_from_records(records))))
        return 0
    if args.command == "render":
        render_svg(read_instance(args.instance), read_placement(args.placement), args.out, nets=args.nets)
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
