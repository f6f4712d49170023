"""Command-line front end.

Exit codes: 0 on success, 2 on configuration or usage errors, 3 when a
mathematical verification fails (a bound is violated, a state is not
stationary, a generator is not primitive, and so on).
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError, LsqError
from .harness import ResultTable, emit_plotdata, run, sweep


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lsq",
        description=(
            "Build reversible quantum Markov generators, evaluate log-Sobolev "
            "and mixing-time bounds, and verify them numerically."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment config")
    run_p.add_argument("--config", required=True, help="TOML experiment file")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--out", default=None, help="CSV output path (default: stdout)")

    sweep_p = sub.add_parser("sweep", help="re-run a config over a parameter grid")
    sweep_p.add_argument("--config", required=True, help="TOML experiment file")
    sweep_p.add_argument("--param", required=True, help="model parameter to sweep")
    sweep_p.add_argument(
        "--values", required=True, help="comma-separated parameter values"
    )
    sweep_p.add_argument("--seed", type=int, default=None, help="override the base seed")
    sweep_p.add_argument("--out", default=None, help="CSV output path (default: stdout)")

    plot_p = sub.add_parser(
        "plotdata", help="run a config and emit whitespace-separated plot columns"
    )
    plot_p.add_argument("--config", required=True, help="TOML experiment file")
    plot_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    plot_p.add_argument(
        "--columns", default=None, help="comma-separated column subset (default: all)"
    )
    plot_p.add_argument("--out", default=None, help="output path (default: stdout)")

    selftest_p = sub.add_parser("selftest", help="run the built-in acceptance checks")
    selftest_p.add_argument(
        "--fast", action="store_true", help="smaller sample counts, same checks"
    )
    return parser


def _load(args) -> "ExperimentConfig":
    config = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError(f"--seed must be nonnegative, got {args.seed}")
        config = config.with_overrides(seed=args.seed)
    return config


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


def _parse_values(raw: str) -> list:
    items = [piece.strip() for piece in raw.split(",") if piece.strip()]
    try:
        return [float(piece) for piece in items]
    except ValueError as exc:
        raise ConfigError(f"--values must be numbers, got {raw!r}") from exc


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "run":
            table = run(_load(args))
            _write(table.to_csv(), args.out)
        elif args.command == "sweep":
            table = sweep(_load(args), args.param, _parse_values(args.values))
            _write(table.to_csv(), args.out)
        elif args.command == "plotdata":
            table = run(_load(args))
            columns = None
            if args.columns is not None:
                columns = [c.strip() for c in args.columns.split(",") if c.strip()]
            text = emit_plotdata(table, None, columns)
            _write(text, args.out)
        elif args.command == "selftest":
            from .selftest import run_selftest

            ok = run_selftest(fast=args.fast, stream=sys.stdout)
            return 0 if ok else 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LsqError as exc:
        print(f"verification failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
