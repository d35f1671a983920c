"""plotkit render --figure figN --data DIR --out DIR

Exit codes: 0 on success, 2 when the dataset is missing or malformed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .recipes import FIGURE_IDS, FigureRecipe, MissingDataset, SchemaMismatch, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit",
                                     description="render cavom datasets to images")
    sub = parser.add_subparsers(dest="command", required=True)
    ren = sub.add_parser("render", help="render one figure from its dataset")
    ren.add_argument("--figure", required=True, choices=FIGURE_IDS)
    ren.add_argument("--data", required=True, type=Path,
                     help="directory holding the figure's CSV/JSON dataset")
    ren.add_argument("--out", required=True, type=Path)
    ren.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    recipe = FigureRecipe(figure_id=args.figure, data_dir=args.data,
                          out_dir=args.out, dpi=args.dpi)
    try:
        path = render(recipe)
    except (MissingDataset, SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
