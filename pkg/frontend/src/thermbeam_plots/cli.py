"""Command line: ``thermbeam-plot <kind> <input...> -o <image> [options]``."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermbeam-plot",
        description="Render simulator trace/sweep CSV files into figures",
    )
    parser.add_argument("kind", choices=sorted(FIGURE_KINDS),
                        help="figure kind to render")
    parser.add_argument("inputs", nargs="+", help="input CSV file(s)")
    parser.add_argument("-o", "--output", required=True, help="output image path")
    parser.add_argument("--title", help="figure title override")
    parser.add_argument("--tth", type=float,
                        help="temperature threshold to mark (temp_evolution)")
    parser.add_argument("--x-key", dest="x_key",
                        help="swept column to use as the x axis")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    options = {k: v for k, v in
               (("title", args.title), ("tth", args.tth), ("x_key", args.x_key))
               if v is not None}
    try:
        spec = FigureSpec(kind=args.kind, inputs=args.inputs,
                          output=args.output, options=options)
        out = render(spec)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"render failure: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
