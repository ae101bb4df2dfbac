"""Command-line entry point: ``frontlab <command> ...`` or ``python -m frontlab``.

Exit codes: 0 success, 2 usage error, 3 invalid config, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from . import catalog
from .config import ExperimentConfig, validate
from .errors import ConfigError, FrontlabError
from .runner import apply_cli_overrides, run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_RUNTIME = 4


def _load(source):
    try:
        return ExperimentConfig.load(source)
    except FileNotFoundError:
        return catalog.load(source)  # allow catalog names wherever a path is accepted


def _execute(cfg, args, expect_mode=None):
    cfg = apply_cli_overrides(cfg, n=args.n, t_max=args.tmax)
    if expect_mode is not None and cfg.mode != expect_mode:
        print(f"error: config mode is {cfg.mode!r}, this command needs {expect_mode!r}", file=sys.stderr)
        return EXIT_INVALID
    problems = validate(cfg)
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return EXIT_INVALID
    results = run(cfg, args.out)
    for res in results:
        print(f"[{res.directory}]")
        for k, v in res.summary.items():
            print(f"  {k} = {v}")
    return EXIT_OK


def _cmd_validate(args):
    cfg = apply_cli_overrides(_load(args.config), n=args.n, t_max=args.tmax)
    problems = validate(cfg)
    if problems:
        for p in problems:
            print(f"invalid: {p}")
        return EXIT_INVALID
    print(f"ok: {cfg.name}")
    return EXIT_OK


def _cmd_catalog(args):
    if args.action == "list":
        for name in catalog.names():
            print(f"{name:20s} {catalog.description(name)}")
        return EXIT_OK
    if args.name is None:
        print("error: catalog run needs an entry name", file=sys.stderr)
        return EXIT_USAGE
    return _execute(catalog.load(args.name), args)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output root directory (default: out)")
    common.add_argument("--n", type=int, default=None, help="override grid.n")
    common.add_argument("--tmax", type=float, default=None, help="override solver.t_max")

    parser = argparse.ArgumentParser(prog="frontlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("run", "run any config"),
        ("validate", "check a config without running it"),
        ("sweep", "run a sweep config"),
        ("threshold", "run a pinning-threshold config"),
        ("invert", "run an invert config"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("config", help="config file or catalog entry name")
    p = sub.add_parser("catalog", parents=[common], help="list or run catalog entries")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("name", nargs="?")
    return parser


_MODE_FOR = {"sweep": "sweep", "threshold": "pinning-threshold", "invert": "invert"}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "catalog":
            return _cmd_catalog(args)
        return _execute(_load(args.config), args, _MODE_FOR.get(args.command))
    except ConfigError as exc:
        for v in exc.violations:
            print(f"invalid: {v}", file=sys.stderr)
        return EXIT_INVALID
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_INVALID
    except FrontlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
