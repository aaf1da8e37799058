"""Command-line entry point ``zeno-chain``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .runner import SCENARIOS, ConfigError, check_rows, default_output_path, load_config, loglog_slope, \
    run_scenario, write_rows

log = logging.getLogger("zeno_chain")


def _parse_args(argv=None):
    parser = argparse.ArgumentParser(prog="zeno-chain",
                                     description="Monitored three-oscillator chain: scenarios, scans and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config file")
    run.add_argument("config", help="key = value scenario file")
    run.add_argument("--out", help="output file (default: $ZENO_CHAIN_OUTPUT_DIR/<scenario>.<format>)")
    run.add_argument("--format", choices=("csv", "jsonl"), help="output format (overrides config)")
    run.add_argument("--seed", type=int, help="random seed (overrides config)")
    run.add_argument("--jobs", type=int, default=1, help="worker processes")

    sub.add_parser("verify", help="run the built-in invariant suite")
    sub.add_parser("scenarios", help="list scenarios and their required keys")
    return parser.parse_args(argv)


def _cmd_run(args) -> int:
    try:
        spec = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2 ** 64:
                raise ConfigError("seed", "must fit in an unsigned 64-bit integer")
            spec = replace(spec, seed=args.seed)
        if args.format:
            spec = replace(spec, format=args.format)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    rows = run_scenario(spec, jobs=max(1, args.jobs))
    out = args.out or spec.output or default_output_path(spec, spec.format)
    path = write_rows(rows, out, spec.format)
    log.info("wrote %d rows to %s", len(rows), path)

    if spec.sweep_variable is None and len(rows) >= 2:
        ns = [r.n for r in rows]
        for label, values in (("abs_error", [r.abs_error for r in rows]), ("1-P", [1.0 - r.P for r in rows])):
            if all(v > 0 for v in values):
                log.info("log-log slope of %s vs n: %.4f", label, loglog_slope(ns, values))

    problems = check_rows(rows)
    for msg in problems:
        print(f"invariant violated: {msg}", file=sys.stderr)
    return 1 if problems else 0


def _cmd_verify() -> int:
    from .verify import run_checks

    results = run_checks()
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def _cmd_scenarios() -> int:
    for name, keys in SCENARIOS.items():
        print(f"{name:<20} {', '.join(keys)}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args = _parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "verify":
        return _cmd_verify()
    return _cmd_scenarios()


if __name__ == "__main__":
    sys.exit(main())
