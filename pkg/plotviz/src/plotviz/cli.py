"""qpdyn-plot: render a figure from pipeline output files.

Exit codes: 0 on success, 2 on a schema violation (message names the
offending field), 1 on any other error.
"""

from __future__ import annotations

import argparse
import sys

from .render import (
    render_error,
    render_frequencies,
    render_modes,
    render_overlay,
)
from .schemas import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpdyn-plot",
        description="Render qpdyn output files as figures",
    )
    sub = parser.add_subparsers(dest="kind", required=True)

    p = sub.add_parser("overlay", help="reference vs reconstruction curves")
    p.add_argument("--reference", required=True, help="reference series CSV")
    p.add_argument("--reconstruction", required=True, help="trajectory CSV")
    p.add_argument("--offset", type=int, default=0,
                   help="reference rows to skip before aligning")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--out", required=True, help="output image path")

    p = sub.add_parser("frequencies", help="frequency stem plot")
    p.add_argument("--in", dest="input", required=True, help="frequency JSON")
    p.add_argument("--out", required=True)

    p = sub.add_parser("modes", help="eigenmode heatmaps")
    p.add_argument("--in", dest="input", required=True, help="modes JSON")
    p.add_argument("--out", required=True)

    p = sub.add_parser("error", help="error curves")
    p.add_argument("--in", dest="input", required=True, help="error CSV")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--out", required=True)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "overlay":
            render_overlay(args.reference, args.reconstruction, args.out,
                           offset=args.offset, dt=args.dt)
        elif args.kind == "frequencies":
            render_frequencies(args.input, args.out)
        elif args.kind == "modes":
            render_modes(args.input, args.out)
        else:
            render_error(args.input, args.out, dt=args.dt)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single exit point
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
