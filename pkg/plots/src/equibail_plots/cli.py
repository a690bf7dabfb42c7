"""equibail-plot — render figures from equibail CSV outputs.

    equibail-plot infusion    --in out/figure_infusion.csv --out fig.png [--panels pre,post,infusion|all] [--dpi 150]
    equibail-plot convergence --in out/concentration.csv --metric sup_deviation --out curve.svg [--dpi 150]

Output format follows the --out extension (.png or .svg).
Exit codes: 0 ok, 2 missing input, 3 schema/metric/argument error.
"""

from __future__ import annotations

import argparse
import sys

from .csvdata import SchemaError
from .figures import FigureSpec, render_convergence, render_infusion_figure

EXIT_OK = 0
EXIT_IO = 2
EXIT_VALIDATION = 3


def _build_parser():
    parser = argparse.ArgumentParser(prog="equibail-plot", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("infusion", help="three-panel infusion figure")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--panels", default="all", help="comma list of pre,post,infusion or 'all'")
    p.add_argument("--dpi", type=int, default=150)
    p = sub.add_parser("convergence", help="median/IQR curve versus n")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "infusion":
            panels = tuple(p.strip() for p in args.panels.split(",") if p.strip())
            path = render_infusion_figure(FigureSpec(input_path=args.input,
                                                     output_path=args.output,
                                                     panels=panels, dpi=args.dpi))
        else:
            path = render_convergence(args.input, args.metric, args.output, dpi=args.dpi)
    except FileNotFoundError as exc:
        print(f"error: io: input not found: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SchemaError, ValueError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
