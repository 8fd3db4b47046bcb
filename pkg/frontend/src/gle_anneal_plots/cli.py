"""CLI: gle-anneal-plot <kind> --in <csv> --out <png> [--potential name]."""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotJob, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gle-anneal-plot",
        description="Render gle-anneal CSV outputs to PNG images.")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="input_csv", required=True)
    parser.add_argument("--out", dest="output", required=True)
    parser.add_argument("--potential", help="contour surface name (trajectory-contour)")
    parser.add_argument("--value", dest="value_column", default="success_window",
                        help="cell value column for sweep-grid")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(input_csv=args.input_csv, kind=args.kind, output=args.output,
                  potential=args.potential, value_column=args.value_column)
    try:
        print(render(job))
    except (SchemaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
