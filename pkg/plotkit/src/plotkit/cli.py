"""Command line: `plot --spec spec.json` or `plot --csv ... --kind ... --out ...`."""

from __future__ import annotations

import argparse
import sys

from .plots import KINDS, PlotSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render benchmark figures from harness CSVs")
    parser.add_argument("--spec", help="JSON plot specification")
    parser.add_argument("--csv", help="input CSV path")
    parser.add_argument("--kind", choices=KINDS)
    parser.add_argument("--out", help="output figure path (.svg or .png)")
    parser.add_argument("--methods", help="comma-separated method filter")
    parser.add_argument("--title", default="")
    args = parser.parse_args(argv)

    try:
        if args.spec:
            spec = PlotSpec.from_json(args.spec)
        else:
            if not (args.csv and args.kind and args.out):
                parser.error("provide --spec or all of --csv/--kind/--out")
            methods = tuple(args.methods.split(",")) if args.methods else ()
            spec = PlotSpec(csv_path=args.csv, kind=args.kind,
                            out_path=args.out, methods=methods,
                            title=args.title)
        out = render(spec)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
