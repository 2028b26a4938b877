"""Command line entry point: ``allee-fronts {simulate,certify,sweep,plot}``.

Exit status: 0 when every requested check passed, 1 when a check failed,
2 for configuration, input or resource errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .config import load_config
from .errors import AlleeFrontsError, ConfigError, ResourceError
from .experiments import run_experiment, sweep_phase_diagram
from .plots import emit_plots


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="allee-fronts", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "certify", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML config or an echoed run.json")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--jobs", type=int, default=None, help="concurrent sweep cells")
        p.add_argument("--seedless", action="store_true",
                       help="no-op: every computation is deterministic")
    p = sub.add_parser("plot")
    p.add_argument("--out", required=True, help="directory holding run or sweep artifacts")
    p.add_argument("--config", help="ignored; accepted for symmetry")
    p.add_argument("--seedless", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot":
            for path in emit_plots(args.out):
                print(path)
            return 0
        cfg = load_config(args.config)
        cfg = replace(cfg, kind=args.command)
        out = args.out if args.out is not None else cfg.output
        if args.command == "sweep":
            if args.jobs is not None and args.jobs < 1:
                raise ConfigError("--jobs must be at least 1")
            return sweep_phase_diagram(cfg.sweep["grid"], cfg, out, jobs=args.jobs)
        return run_experiment(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 2
    except (AlleeFrontsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
