"""render_fig: plot simulator CSV curves as a multi-panel log-log figure."""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, MissingSeriesError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render_fig")
    parser.add_argument("--csv", action="append", required=True,
                        help="input CSV (repeatable; curves are merged)")
    parser.add_argument("--out", required=True, help="output .svg or .png")
    parser.add_argument("--panels", default="r", help="panel grouping column")
    parser.add_argument("--t-min", type=float, default=None)
    parser.add_argument("--t-max", type=float, default=None)
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(csv_paths=tuple(args.csv), out_path=args.out,
                          panel_key=args.panels, t_min=args.t_min,
                          t_max=args.t_max)
        render(spec)
    except MissingSeriesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
