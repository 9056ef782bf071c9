"""Script entry: one process renders one figure.

Exit codes: 0 success, 2 usage or schema mismatch, 1 anything else.
"""

import argparse
import sys

from .render import DEFAULT_FLOOR, KINDS, FigureJob, render
from .schemas import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(
        prog="harperfigs",
        description="Render a figure out of exported harperdrift CSV/JSON data.")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("inputs", nargs="+", help="exporter data files")
    parser.add_argument("--floor", type=float, default=DEFAULT_FLOOR,
                        help="colorbar floor (default %(default)g)")
    parser.add_argument("--cmap")
    parser.add_argument("--dpi", type=int, default=150)
    parser.add_argument("--levels", type=int,
                        help="contour count for level_curves")
    parser.add_argument("--separatrix",
                        help="'eps' for sweep-dependent edges, or 'LO,HI'")
    parser.add_argument("--a", type=float, default=1.0,
                        help="amplitude used with --separatrix eps")
    return parser


def _options(args):
    opts = {"floor": args.floor, "dpi": args.dpi, "a": args.a}
    if args.cmap:
        opts["cmap"] = args.cmap
    if args.levels:
        opts["levels"] = args.levels
    if args.separatrix:
        if args.separatrix == "eps":
            opts["separatrix"] = "eps"
        else:
            try:
                lo, hi = (float(t) for t in args.separatrix.split(","))
            except ValueError:
                raise SchemaError("--separatrix expects 'eps' or 'LO,HI'")
            opts["separatrix"] = (lo, hi)
    return opts


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv if argv is not None else sys.argv[1:])
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    try:
        render(FigureJob(kind=args.kind, inputs=tuple(args.inputs),
                         output=args.out, options=_options(args)))
        return 0
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(run())
