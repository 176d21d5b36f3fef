"""Command line interface.

    qbil simulate --config run.cfg --out out/run1 [--force]
    qbil classical --config run.cfg --out out/rays
    qbil spectrum  --config run.cfg --out out/levels
    qbil poles     --config run.cfg --out out/poles [--radius inf]
    qbil sid       --config run.cfg --out out/sid
    qbil analyze   --both d1 --only1 d2 --only2 d3 --out out/dec

Exit codes: 0 success, 2 config or geometry problem, 3 numerical failure,
4 input/output problem, 1 anything unexpected.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import ConfigError, IoFormatError, NumericsError, QbilError
from . import runner

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _add_common(sub):
    sub.add_argument("--config", required=True, help="config file path")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--force", action="store_true",
                     help="reuse a nonempty output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qbil",
        description="triangular-cavity two-slit interference laboratory",
        epilog="exit codes: 0 ok, 2 config, 3 numerics, 4 io, 1 unexpected")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, descr in (
            ("simulate", "propagate a packet and record the detector film"),
            ("classical", "trace rays, stretching rate, direction census"),
            ("spectrum", "closed cavity levels and recurrence scales"),
            ("sid", "stationary interference sums and decay scan"),
    ):
        sub = subs.add_parser(name, help=descr)
        _add_common(sub)

    sub = subs.add_parser("poles", help="finite wall pole and damping time")
    _add_common(sub)
    sub.add_argument("--radius", "--a", default=None,
                     help="override [poles] radius; accepts inf")

    sub = subs.add_parser("analyze",
                          help="decompose two-slit minus single-slit records")
    sub.add_argument("--both", required=True, help="two-slit run directory")
    sub.add_argument("--only1", required=True, help="slit-1 run directory")
    sub.add_argument("--only2", required=True, help="slit-2 run directory")
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--force", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            out = runner.run_analyze(args.both, args.only1, args.only2,
                                     args.out, force=args.force)
        else:
            cfg = load_config(args.config)
            if args.command == "simulate":
                out = runner.run_simulate(cfg, args.out, force=args.force)
            elif args.command == "classical":
                out = runner.run_classical(cfg, args.out, force=args.force)
            elif args.command == "spectrum":
                out = runner.run_spectrum(cfg, args.out, force=args.force)
            elif args.command == "poles":
                if args.radius is not None:
                    try:
                        cfg["poles"]["radius"] = float(args.radius)
                    except ValueError:
                        raise ConfigError(
                            f"--radius expects a number or inf, "
                            f"got {args.radius!r}") from None
                out = runner.run_poles(cfg, args.out, force=args.force)
            elif args.command == "sid":
                out = runner.run_sid(cfg, args.out, force=args.force)
            else:  # pragma: no cover - argparse guards this
                raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"qbil: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericsError as exc:
        print(f"qbil: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (IoFormatError, OSError) as exc:
        print(f"qbil: io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QbilError as exc:
        print(f"qbil: error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
