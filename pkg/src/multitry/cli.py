"""Command-line interface.

Subcommands:

    multitry plan EXPERIMENT [--scale desk|paper] [-o FILE]
        Write the experiment's default plan file (stdout by default).

    multitry run PLANFILE -o results.csv [--workers N]
        Expand and run a plan, writing the result CSV.

    multitry summarize RESULTS -o summary.csv
        Reduce a result CSV to across-run quantile summaries.

    multitry verify [-o report.csv]
        Run the stationarity / reversibility verification battery;
        exits nonzero if any check fails.
"""

from __future__ import annotations

import argparse
import sys

from . import balance, harness

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multitry",
        description="Multiple-try Metropolis experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_plan = sub.add_parser("plan", help="write a default plan file")
    p_plan.add_argument("experiment", choices=harness.EXPERIMENTS)
    p_plan.add_argument("--scale", choices=("desk", "paper"), default="desk")
    p_plan.add_argument("--master-seed", type=int, default=1)
    p_plan.add_argument("-o", "--output", default=None,
                        help="plan file path (default: stdout)")

    p_run = sub.add_parser("run", help="run a plan file")
    p_run.add_argument("planfile")
    p_run.add_argument("-o", "--output", required=True, help="result CSV path")
    p_run.add_argument("--workers", type=int, default=1,
                       help="process-pool size (default: serial)")

    p_sum = sub.add_parser("summarize", help="summarise a result CSV")
    p_sum.add_argument("results")
    p_sum.add_argument("-o", "--output", required=True, help="summary CSV path")

    p_ver = sub.add_parser("verify", help="run the balance verification battery")
    p_ver.add_argument("-o", "--output", default=None,
                       help="also write the report as CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (OSError, ValueError) as exc:
        print(f"multitry: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "plan":
        plan = harness.default_plan(args.experiment, scale=args.scale,
                                    master_seed=args.master_seed)
        if args.output:
            harness.write_plan_file(plan, args.output)
            pre, post = harness.plan_counts(plan)
            print(f"wrote {args.output}: {pre} settings, {post} runnable cells")
        else:
            import tempfile
            from pathlib import Path
            with tempfile.NamedTemporaryFile("r", suffix=".plan") as tmp:
                harness.write_plan_file(plan, tmp.name)
                sys.stdout.write(Path(tmp.name).read_text())
        return 0

    if args.command == "run":
        plan = harness.read_plan_file(args.planfile)
        rows = harness.run_plan(plan, args.output, workers=args.workers)
        pre, post = harness.plan_counts(plan)
        print(f"ran {post} cells ({pre} settings before exclusions), "
              f"{len(rows)} result rows -> {args.output}")
        return 0

    if args.command == "summarize":
        rows = harness.read_results_csv(args.results)
        summary = harness.summarize(rows)
        harness.write_summary_csv(summary, args.output)
        print(f"{len(summary)} summary rows -> {args.output}")
        return 0

    if args.command == "verify":
        reports = balance.verification_suite()
        print(balance.format_reports(reports))
        if args.output:
            balance.write_reports_csv(reports, args.output)
        failed = [r for r in reports if not r.passed]
        print(f"{len(reports) - len(failed)}/{len(reports)} checks passed")
        return 1 if failed else 0

    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
