"""Command line for rendering figures from rampmcmc result files."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .csvdata import SchemaError
from .figures import FIGURE_KINDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gapplots", description="Render figures from rampmcmc CSV/JSON outputs"
    )
    commands = parser.add_subparsers(dest="command", required=True)
    draw = commands.add_parser("render", help="render one figure")
    draw.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    draw.add_argument("--data", required=True, help="primary result CSV")
    draw.add_argument("--overlay", help="secondary CSV (e.g. exact gaps over bounds)")
    draw.add_argument("--fit", action="append", default=[],
                      help="fit.json overlay; repeatable")
    draw.add_argument("--output", required=True, help="image path; format by extension")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        data=Path(args.data),
        output=Path(args.output),
        overlay=Path(args.overlay) if args.overlay else None,
        fits=tuple(Path(path) for path in args.fit),
    )
    try:
        render(spec)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
