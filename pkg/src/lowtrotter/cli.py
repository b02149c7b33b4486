"""``lowtrotter`` command-line entry point.

Exit codes: 0 all verdicts pass, 1 a dominance verdict fails, 2 usage or
configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments as X
from .config import CONFIG_KEYS, WORKERS_ENV, ConfigError, load_config
from .pauli_model import DimensionTooLarge
from .report import emit_report, emit_rows

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3


def _epilog() -> str:
    width = max(map(len, CONFIG_KEYS))
    lines = ["config keys (JSON object):"]
    lines += [f"  {k:<{width}}  {v}" for k, v in CONFIG_KEYS.items()]
    lines += ["", f"environment: {WORKERS_ENV} sets the default worker count",
              "exit codes: 0 pass, 1 verdict failure, 2 usage/config error, 3 runtime error"]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lowtrotter",
        description="Low-energy product-formula error bounds on small spin chains.",
        epilog=_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def with_config(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=_epilog(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", help="output path (default: config 'output' or stdout)")
        p.add_argument("--format", choices=("csv", "json"), help="report format")
        p.add_argument("--workers", type=int, help=f"worker threads (default ${WORKERS_ENV})")
        return p

    with_config("analyze", "measure errors and check every bound on an (s, delta) grid")
    with_config("leakage", "random local-operator and product-formula leakage sweeps")
    with_config("cost", "cost-law tables and empirical minimal Trotter numbers")
    cmp_ = sub.add_parser("compare", help="cost-law exponent table and N-exponent data over p = 1..8")
    cmp_.add_argument("--orders", default="1,2,3", help="comma-separated orders (default 1,2,3)")
    cmp_.add_argument("--format", choices=("csv", "json"), default="csv")
    cmp_.add_argument("--out")
    return parser


def _parse_orders(text: str) -> list[int]:
    try:
        orders = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--orders: expected comma-separated integers, got {text!r}") from None
    if not orders or min(orders) < 1:
        raise ConfigError("--orders: need at least one order >= 1")
    return orders


def _write_failures(failures, out: str | None) -> None:
    if not failures:
        return
    payload = json.dumps([{"point": f.point, "error": f.error} for f in failures], indent=1)
    if out:
        Path(out + ".failures.json").write_text(payload + "\n")
    print(f"{len(failures)} grid point(s) failed:", file=sys.stderr)
    for f in failures:
        print(f"  {f.point}: {f.error}", file=sys.stderr)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE

    try:
        if args.command == "compare":
            orders = _parse_orders(args.orders)
            rows = X.exponent_table(orders) + X.n_exponent_series()
            emit_rows(rows, args.format, args.out, None if args.out else sys.stdout)
            return EXIT_OK

        config = load_config(args.config)
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            config = type(config)(**{**config.__dict__, "workers": args.workers})
        out = args.out or config.output
        fmt = args.format or config.format
        stream = None if out else sys.stdout

        if args.command == "analyze":
            result = X.run_analyze(config)
            emit_report(result.rows, fmt, out, stream)
            verdict_fail = any(not r.passed for r in result.rows)
        elif args.command == "leakage":
            result = X.run_leakage(config)
            emit_rows(result.rows, fmt, out, stream)
            verdict_fail = any(r["verdict"] == "fail" for r in result.rows)
        else:
            result = X.run_cost(config)
            emit_rows(result.rows, fmt, out, stream)
            verdict_fail = False
    except (ConfigError, DimensionTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    _write_failures(result.failures, out)
    if result.failures:
        return EXIT_RUNTIME
    return EXIT_FAIL if verdict_fail else EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))
