"""Command-line entry point: simulate, summarize, verify, list-algorithms.

Exit codes: 0 success, 1 usage or input error, 2 partial grid failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness, verify

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_parser(simulate_defaults: dict | None = None) -> argparse.ArgumentParser:
    parser = _Parser(prog="hybridsel",
                     description="Benchmark regularized, tree-ensemble and hybrid "
                                 "selectors on Friedman data.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="run the scenario grid")
    sim.add_argument("--config", help="flat key=value file; explicit flags win")
    sim.add_argument("--n", type=_int_list, default=(50, 100, 200, 500, 1000),
                     help="sample sizes (default 50,100,200,500,1000)")
    sim.add_argument("--p", type=_int_list, default=(5, 10, 50, 100),
                     help="predictor counts (default 5,10,50,100)")
    sim.add_argument("--nsim", type=int, default=10, help="replicates per cell (default 10)")
    sim.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    sim.add_argument("--folds", type=int, default=5, help="CV folds (default 5)")
    sim.add_argument("--noisy", type=_bool, default=True, help="add N(0,1) noise (default true)")
    sim.add_argument("--workers", type=int, default=harness.default_workers(),
                     help="worker processes (default: CPU count)")
    sim.add_argument("--out", default="results", help="output directory (default ./results)")
    if simulate_defaults:
        sim.set_defaults(**simulate_defaults)

    summ = sub.add_parser("summarize", help="tabulate a raw results CSV")
    summ.add_argument("--in", dest="inp", required=True, help="raw CSV from simulate")
    summ.add_argument("--metric", default="rmse", help="rmse, jaccard or recovery")
    summ.add_argument("--p", type=_int_list, default=None, help="keep these p values")
    summ.add_argument("--n", type=_int_list, default=None, help="keep these n values")
    summ.add_argument("--out", default=None, help="also write the summary CSV here")

    ver = sub.add_parser("verify", help="run the numerical oracle suites")
    ver.add_argument("--only", action="append", default=None,
                     help=f"suite to run, repeatable ({', '.join(verify.SUITES)})")

    sub.add_parser("list-algorithms", help="print the 23 algorithm ids")
    return parser


SIMULATE_KEYS = {"n": _int_list, "p": _int_list, "nsim": int, "seed": int, "folds": int,
                 "noisy": _bool, "workers": int, "out": str}


def _config_defaults(path: str) -> dict:
    out = {}
    for key, value in _read_config(path).items():
        if key not in SIMULATE_KEYS:
            raise UsageError(f"{path}: unknown key {key!r}")
        try:
            out[key] = SIMULATE_KEYS[key](value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}: bad value for {key}: {exc}")
    return out


def _parse(argv):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.config:
        try:
            defaults = _config_defaults(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}")
        parser = build_parser(defaults)
        args = parser.parse_args(argv)
    return args


def cmd_simulate(args) -> int:
    if args.nsim < 1 or args.folds < 2 or args.workers < 1:
        raise UsageError("--nsim and --workers must be >= 1 and --folds >= 2")
    try:
        config = harness.GridConfig(n_list=args.n, p_list=args.p, n_sim=args.nsim,
                                    k_folds=args.folds, master_seed=args.seed,
                                    noisy=args.noisy, workers=args.workers, out_dir=args.out)
    except ValueError as exc:
        raise UsageError(str(exc))
    result = harness.run_grid(config)
    print(f"wrote {len(result.records)} records to {result.raw_path}")
    if result.n_failed:
        print(f"{result.n_failed} runs failed; see fail_reason in {result.raw_path}",
              file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_summarize(args) -> int:
    if args.metric not in harness.METRICS:
        raise UsageError(f"unknown metric {args.metric!r}; choose from {harness.METRICS}")
    try:
        records = harness.read_raw_csv(args.inp)
        summary = harness.summarize(records, args.metric, args.p, args.n)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc))
    print(summary.render_text())
    if args.out:
        summary.to_csv(args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        results = verify.run_suites(args.only)
    except KeyError as exc:
        raise UsageError(exc.args[0])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<13} {r.detail}  [{r.seconds:.1f}s]")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed suites: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_list_algorithms(args) -> int:
    for algo in harness.enumerate_algorithms():
        print(f"{algo.id}\t{harness.FAMILY_LABELS[algo.family]}")
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "summarize": cmd_summarize, "verify": cmd_verify,
            "list-algorithms": cmd_list_algorithms}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s",
                        stream=sys.stderr)
    try:
        args = _parse(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
