"""Command line entry point: ``stirring-lab <subcommand> [flags]``.

Exit status: 0 on success, 2 on a bad configuration, 3 on an invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .. import __version__
from ..errors import InvalidParameter, InvariantViolation
from . import experiments
from .config import ExperimentConfig, load_config, merge
from .records import RunRecord
from .selftest import run_selftest

SUBCOMMANDS = ("phase-sweep", "line-tail", "iota-orbit", "split-rate", "coupling",
               "subcritical", "crw-trace", "selftest")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", help="JSON config file; flags override its fields")
    g.add_argument("--n", type=int, help="side length of H(2, n)")
    g.add_argument("--beta", type=_floats, help="t = beta n^2; comma separated grid for phase-sweep")
    g.add_argument("--replicas", type=int)
    g.add_argument("--seed", type=int, help="default: $STIRRING_LAB_SEED or a fixed constant")
    g.add_argument("--out", help="write the record here (JSON line) plus <out>.replicas.csv")
    g.add_argument("--threads", type=int, help="worker processes; results do not depend on it")
    e = common.add_argument_group("experiment parameters")
    e.add_argument("--k", type=int)
    e.add_argument("--ell", type=int)
    e.add_argument("--M", type=int, help="largest M in the line-tail survival table")
    e.add_argument("--delta", type=float, help="coupling window length Delta")
    e.add_argument("--delta-frac", dest="delta_frac", type=float,
                   help="sprinkling level delta in (0, 1)")
    e.add_argument("--C", type=float, help="subcritical threshold C log n")
    e.add_argument("--grid", choices=("auto", "event", "fixed"))

    parser = argparse.ArgumentParser(prog="stirring-lab",
                                     description="Interchange process experiments on H(2, n)")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _emit(record: RunRecord, out: str | None) -> None:
    if out:
        record.write(out)
    else:
        sys.stdout.write(record.to_json() + "\n")


def _selftest(cfg_seed: int | None, out: str | None) -> int:
    started = time.perf_counter()
    seed = cfg_seed if cfg_seed is not None else 0
    checks = run_selftest(seed)
    failed = sum(c["violations"] for c in checks.values())
    record = RunRecord("selftest", {"seed": seed}, [], checks, seed, __version__,
                       runtime={"wall_clock_s": time.perf_counter() - started})
    _emit(record, out)
    for name, c in checks.items():
        print(f"{'PASS' if not c['violations'] else 'FAIL'} {name}", file=sys.stderr)
    return 3 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = load_config(args.config) if args.config else {}
        if args.command == "selftest":
            seed = overrides["seed"] if overrides["seed"] is not None else file_values.get("seed")
            return _selftest(seed, overrides["out"] or file_values.get("out"))
        cfg: ExperimentConfig = merge(args.command, file_values, overrides)
    except (InvalidParameter, OSError, json.JSONDecodeError, TypeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"stirring-lab: error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "crw-trace":
            record, traces = experiments.crw_trace(cfg)
            if cfg.out:
                Path(cfg.out).with_suffix(".traces.jsonl").parent.mkdir(parents=True, exist_ok=True)
                Path(cfg.out).with_suffix(".traces.jsonl").write_text(traces)
        else:
            record = experiments.EXPERIMENTS[args.command](cfg)
    except InvalidParameter as exc:
        print(f"stirring-lab: error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"stirring-lab: invariant violation: {exc}", file=sys.stderr)
        return 3
    _emit(record, cfg.out)
    for w in record.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
