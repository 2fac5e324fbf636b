"""Command-line batch renderer for the simulation CSVs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .panels import PanelKind, render_all

_FILTER_KEYS = ("dist", "gamma", "C", "m")


def _parse_filter(text: str) -> dict:
    out: dict = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key or not value:
            raise argparse.ArgumentTypeError(
                f"filter entries look like key=value, got {part!r}"
            )
        if key == "dist":
            out["dist"] = value
        elif key == "gamma":
            out["gamma"] = float(value)
        elif key == "C":
            out["C"] = float(value)
        elif key == "m":
            out["m"] = int(value)
        else:
            raise argparse.ArgumentTypeError(
                f"unknown filter key {key!r} (expected one of {', '.join(_FILTER_KEYS)})"
            )
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abos-figures",
        description="Render static panels from simulation result CSVs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    render = sub.add_parser("render", help="render every panel plus an index page")
    render.add_argument(
        "--in",
        dest="in_dir",
        required=True,
        help="directory holding scenario1.csv / scenario2.csv",
    )
    render.add_argument("--out", dest="out_dir", required=True)
    render.add_argument(
        "--panel",
        action="append",
        choices=[kind.value for kind in PanelKind],
        help="restrict to one panel kind (repeatable; default: all)",
    )
    render.add_argument(
        "--filter",
        type=_parse_filter,
        default=None,
        metavar="K=V,...",
        help="restrict cells, e.g. dist=student-t,gamma=3,C=1,m=10000",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    kinds = tuple(PanelKind(name) for name in args.panel) if args.panel else None
    try:
        results = render_all(
            args.in_dir, args.out_dir, kinds=kinds, cell_filter=args.filter
        )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for result in results:
        print(f"wrote {result.path}")
    print(f"wrote {Path(args.out_dir) / 'index.html'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
