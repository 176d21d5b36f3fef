"""Command line front end: render --kind <kind> --in <csv...> --out <img>."""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, PlotsError, render_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="draw a static figure from run-directory csv files",
        epilog="exit codes: 0 ok, 2 bad input, 1 unexpected",
    )
    parser.add_argument("--kind", required=True, choices=sorted(KINDS),
                        help="which figure to draw")
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV", help="input csv file(s), order matters")
    parser.add_argument("--out", required=True,
                        help="output image path (.png or .svg)")
    parser.add_argument("--labels", nargs="+", default=[], metavar="TEXT",
                        help="legend labels, one per input csv")
    parser.add_argument("--title", default="", help="figure title override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        inputs=tuple(args.inputs),
        out=args.out,
        labels=tuple(args.labels),
        title=args.title,
    )
    try:
        out = render_figure(spec)
    except PlotsError as exc:
        print(f"render: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"render: unexpected error: {exc}", file=sys.stderr)
        return 1
    print(str(out))
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
