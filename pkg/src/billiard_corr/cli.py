"""Command-line interface.

    billiard-corr run --scenario basic --n 5000 --seed 42 --out out/
    billiard-corr compare basic long_time fast_cue --n 5000
    billiard-corr scenarios

Exit codes: 0 success, 1 simulation failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ensemble import run_ensemble
from .estimators import resolve_scenario
from .exceptions import BilliardError, ConfigError, ContractError, PackingError, SimulationError
from .io import write_report_csv, write_trace_csv
from .scenario import BUILTIN_NAMES, builtin_scenario, describe
from .statistics import correlation_report, default_checkpoints

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def _uint64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2**64), got {v}")
    return v


def _add_common(p):
    p.add_argument("--n", type=int, default=5000, help="number of tables (default 5000)")
    p.add_argument("--seed", type=_uint64, default=0, help="master seed (default 0)")
    p.add_argument("--checkpoints", type=int, default=50, help="number of trace checkpoints")
    p.add_argument("--checkpoint-spacing", choices=("linear", "log"), default="log")
    p.add_argument("--bootstrap", type=int, default=1000, help="bootstrap resamples (default 1000)")
    p.add_argument("--ci-level", type=float, default=0.95)
    p.add_argument("--workers", type=int, default=None, help="threads (default: CPU count)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="billiard-corr", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write trace.csv and report.csv")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", choices=BUILTIN_NAMES)
    src.add_argument("--config", type=Path, help="JSON scenario file")
    _add_common(run)

    cmp_ = sub.add_parser("compare", help="run several scenarios and write compare.csv")
    cmp_.add_argument("scenarios", nargs="+", help="builtin names or JSON config paths")
    _add_common(cmp_)

    sub.add_parser("scenarios", help="list the builtin scenarios")
    return parser


def _check_args(args):
    if args.n < 1:
        raise _UsageError(f"--n must be at least 1, got {args.n}")
    if args.checkpoints < 1:
        raise _UsageError(f"--checkpoints must be at least 1, got {args.checkpoints}")
    if args.bootstrap < 100:
        raise _UsageError(f"--bootstrap must be at least 100, got {args.bootstrap}")
    if not 0 < args.ci_level < 1:
        raise _UsageError(f"--ci-level must lie in (0, 1), got {args.ci_level}")
    if args.workers is not None and args.workers < 1:
        raise _UsageError(f"--workers must be at least 1, got {args.workers}")
    if args.out.exists() and not args.out.is_dir():
        raise _UsageError(f"--out {args.out} is not a directory")


def _analyse(config, args):
    cps = default_checkpoints(args.n, args.checkpoints, args.checkpoint_spacing)
    result = run_ensemble(config, args.n, args.seed, cps, args.workers)
    rep = correlation_report(result.flags, args.bootstrap, args.ci_level, args.seed)
    return result, rep


def _summary(name, rep) -> str:
    return (f"{name}: N={rep.n}  P(E1)={rep.p1_hat:.4f}  P(E2)={rep.p2_hat:.4f}  "
            f"P(E1,E2)={rep.p12_hat:.4f}  P(E1)P(E2)={rep.product:.4f}  "
            f"delta={rep.delta:.4f} +/- {rep.ci_halfwidth:.4f} ({rep.ci_level:g})  "
            f"{'significant' if rep.significant else 'not significant'}")


def cmd_run(args) -> int:
    _check_args(args)
    config = resolve_scenario(args.config if args.config is not None else args.scenario)
    name = args.scenario or config.name or "config"
    result, rep = _analyse(config, args)
    args.out.mkdir(parents=True, exist_ok=True)
    write_trace_csv(result.trace, args.out / "trace.csv")
    write_report_csv([(name, rep)], args.out / "report.csv")
    print(_summary(name, rep))
    return EXIT_OK


def cmd_compare(args) -> int:
    if len(args.scenarios) < 2:
        raise _UsageError("compare needs at least two scenarios")
    _check_args(args)
    configs = [(s, resolve_scenario(s)) for s in args.scenarios]
    rows = []
    for source, config in configs:
        name = source if source in BUILTIN_NAMES else (config.name or source)
        _, rep = _analyse(config, args)
        rows.append((name, rep))
        print(_summary(name, rep))
    args.out.mkdir(parents=True, exist_ok=True)
    write_report_csv(rows, args.out / "compare.csv")
    ordered = sorted(rows, key=lambda r: -r[1].delta)
    print("delta ordering: " + " > ".join(f"{n} ({r.delta:.4f})" for n, r in ordered))
    return EXIT_OK


def cmd_scenarios(args) -> int:
    for name in BUILTIN_NAMES:
        print(f"{name}:")
        print(describe(builtin_scenario(name)))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    handler = {"run": cmd_run, "compare": cmd_compare, "scenarios": cmd_scenarios}[args.command]
    try:
        return handler(args)
    except (_UsageError, ConfigError, ContractError, PackingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SimulationError, BilliardError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
