"""Command-line front end.

    attest run --scenario cfg.json [--seed N] [--out DIR] [--payment-variant V]
    attest verify-trace trace.jsonl
    attest sweep --scenario cfg.json --seeds N --out DIR

Exit codes: 0 on success, 1 on configuration problems, 2 when a trace
fails verification.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .money import format_micro
from .scenario import ScenarioValidationError, load_config, run, write_outputs
from .trust import PAYMENT_VARIANTS
from .verify import verify_trace


def _add_run_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", required=True, help="scenario config (JSON)")
    parser.add_argument("--out", help="directory for trace/CSV/summary outputs")
    parser.add_argument(
        "--payment-variant",
        choices=sorted(PAYMENT_VARIANTS),
        help="override the configured payment variant",
    )


def _print_report(report) -> None:
    print(f"seed {report.seed}: {len(report.design_rows)} design round(s)")
    for row in report.design_rows:
        parts = [f"  design {row['design']:>3} truth={'+1' if row['truth'] else '-1'}"]
        if row["final_score_eval"] is not None:
            parts.append(f"eval={row['final_score_eval']:.6f} ({row['result_eval']:+d})")
        if row["final_score_feedback"] is not None:
            parts.append(
                f"feedback={row['final_score_feedback']:.6f} ({row['result_feedback']:+d})"
            )
        parts.append(f"phase={row['final_phase']}")
        print("  ".join(parts))
    for row in report.player_rows:
        reputation = (
            f"{row['final_reputation']:.6f}" if row["final_reputation"] is not None else "—"
        )
        print(
            f"  {row['player']:<12} strategy={row['strategy']:<16} "
            f"utility={format_micro(row['utility_micro'])} reputation={reputation}"
        )
    print(f"  conservation: {'exact' if report.conservation_ok else 'BROKEN'}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="attest",
        description="commit-reveal design voting: simulate, sweep, verify",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario")
    _add_run_args(run_p)
    run_p.add_argument("--seed", type=int, help="override the configured seed")

    verify_p = sub.add_parser("verify-trace", help="check a trace file")
    verify_p.add_argument("trace", help="trace.jsonl produced by a run")

    sweep_p = sub.add_parser("sweep", help="run the same scenario over many seeds")
    _add_run_args(sweep_p)
    sweep_p.add_argument("--seeds", type=int, required=True, help="number of seeds")

    args = parser.parse_args(argv)

    if args.command == "verify-trace":
        outcome = verify_trace(args.trace)
        if outcome.ok:
            print(f"{args.trace}: OK")
            return 0
        where = f" (line {outcome.line})" if outcome.line is not None else ""
        print(f"{args.trace}: FAILED{where}: {outcome.error}")
        return 2

    try:
        config = load_config(args.scenario)
    except (OSError, ScenarioValidationError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 1

    if args.command == "run":
        try:
            report = run(config, seed=args.seed, payment_variant=args.payment_variant)
        except ValueError as exc:
            print(f"invalid scenario: {exc}", file=sys.stderr)
            return 1
        _print_report(report)
        if args.out:
            paths = write_outputs(report, Path(args.out))
            for name in sorted(paths):
                print(f"  wrote {paths[name]}")
        return 0

    if args.command == "sweep":
        if args.seeds < 1:
            print("invalid scenario: --seeds must be at least 1", file=sys.stderr)
            return 1
        out_root = Path(args.out) if args.out else None
        for i in range(args.seeds):
            seed = (config.seed + i) % 2**64
            report = run(config, seed=seed, payment_variant=args.payment_variant)
            _print_report(report)
            if out_root is not None:
                paths = write_outputs(report, out_root / f"seed-{seed}")
                print(f"  wrote {len(paths)} files under {out_root / f'seed-{seed}'}")
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
