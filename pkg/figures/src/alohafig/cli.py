"""Command-line figure renderer: one subcommand, five figure kinds."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureSpec, RenderError, load_style_file, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alohafig", description="Render sweep figures from harness CSVs")
    commands = parser.add_subparsers(dest="command", required=True)
    sub = commands.add_parser("render", help="render one figure")
    sub.add_argument("--kind", required=True, choices=sorted(FIGURE_KINDS),
                     help="figure kind")
    sub.add_argument("--in", dest="inputs", required=True, action="append",
                     metavar="CSV", help="input records CSV (repeatable)")
    sub.add_argument("--out", required=True, metavar="IMG",
                     help="output image path (.png, .pdf or .svg)")
    sub.add_argument("--style", metavar="FILE",
                     help="flat style file: '<method>.color = ...' lines")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    styles: dict = {}
    dpi = 200
    if args.style:
        loaded = load_style_file(args.style)
        styles = loaded["styles"]
        dpi = loaded["dpi"] or dpi
    spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs),
                      output=args.out, styles=styles, dpi=dpi)
    try:
        out = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
