"""Command-line entry point: ``varexp run`` and ``varexp suite``."""

from __future__ import annotations

import argparse
import logging
import sys

from .. import geometry
from .emit import emit
from .scenario import Scenario, run
from .suite import TITLES, suite_scenarios

log = logging.getLogger("varexp")


def _line(report) -> str:
    agg = report.aggregate
    status = "PASS" if report.passed else "FAIL"
    mx = agg["max_ratio"]
    return (f"{status} {report.name}: trials={agg['trials']} errors={agg['errors']} failed={agg['failed']} "
            f"max_ratio={mx if mx is None else format(mx, '.6g')} drift_c={agg['drift_c']:.4g} "
            f"drift_seed={agg['drift_seed']:.4g}")


def cmd_run(args) -> int:
    scenario = Scenario.load(args.scenario)
    report = run(scenario, args.threads)
    if args.out:
        emit(report, args.formats, args.out)
    print(_line(report))
    for w in report.warnings:
        print(f"  warning: {w}")
    return 0 if report.passed else 1


def cmd_suite(args) -> int:
    all_ok = True
    wanted = set(args.criteria) if args.criteria else None
    for k, scenarios in suite_scenarios(args.quick).items():
        if wanted and k not in wanted:
            continue
        reports = [run(s, args.threads) for s in scenarios]
        ok = all(r.passed for r in reports)
        all_ok &= ok
        print(f"{'PASS' if ok else 'FAIL'} criterion {k}: {TITLES[k]}")
        for r in reports:
            print("  " + _line(r))
            if args.out:
                emit(r, args.formats, args.out)
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varexp", description="Seeded numerical checks for variable-exponent "
                                     "fractional integrals.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory for reports")
        p.add_argument("--formats", default="json,csv,svg", help="comma-separated subset of json,csv,svg")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--bit-reproducible", action="store_true",
                       help="order-independent summation and direct convolutions")

    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_suite = sub.add_parser("suite", help="run the built-in acceptance scenarios")
    p_suite.add_argument("--quick", action="store_true", help="about a tenth of the seeds")
    p_suite.add_argument("--criteria", type=int, nargs="*", help="restrict to these criterion numbers")
    common(p_suite)
    p_suite.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    geometry.set_bit_reproducible(args.bit_reproducible)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
