"""Command line entry point.

    chaoslab <experiment> --config PATH [--seed N] [--workers N] [--out DIR]
    chaoslab presets
    chaoslab validate --config PATH
"""
import argparse
import sys

from ..billiards.presets import PRESETS
from ..observables import BILLIARD_PRESETS, INTERVAL_PRESETS
from ..parallel import ENV_WORKERS
from .config import KINDS, ConfigError, parse_config
from .runner import EXIT_ERROR, run_safely


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load(path, problems_to=None):
    problems_to = problems_to or sys.stderr
    try:
        return parse_config(_read(path))
    except ConfigError as exc:
        for p in exc.problems:
            print(f"{path}: {p}", file=problems_to)
    except OSError as exc:
        print(f"{path}: {exc}", file=problems_to)
    return None


def build_parser():
    parser = argparse.ArgumentParser(prog="chaoslab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int,
                       help=f"worker threads (default: ${ENV_WORKERS} or CPU count)")
        p.add_argument("--out", help="output directory (default: config 'out' or ./out)")
    sub.add_parser("presets", help="list systems and observables")
    v = sub.add_parser("validate", help="check a config file")
    v.add_argument("--config", required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print("systems: lsv, bernoulli")
        print("billiard tables: " + ", ".join(sorted(PRESETS)))
        print("interval observables: " + ", ".join(sorted(INTERVAL_PRESETS)))
        print("billiard observables: " + ", ".join(sorted(BILLIARD_PRESETS)))
        print("experiments: " + ", ".join(KINDS))
        return 0
    config = _load(args.config)
    if config is None:
        return EXIT_ERROR
    if args.command == "validate":
        print(f"{args.config}: ok ({config.experiment})")
        return 0
    if config.experiment != args.command:
        print(f"config experiment {config.experiment!r} does not match {args.command!r}",
              file=sys.stderr)
        return EXIT_ERROR
    try:
        config = config.with_values(seed=args.seed, workers=args.workers, out=args.out)
    except ConfigError as exc:
        for p in exc.problems:
            print(p, file=sys.stderr)
        return EXIT_ERROR
    out = config.get("out") or "out"
    result, code = run_safely(config, out)
    if code == EXIT_ERROR:
        print(f"error: {result}", file=sys.stderr)
    else:
        print(f"{config.experiment}: {result.verdict} -> {out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
