"""plotkit command line: one figure per invocation.

Usage: plotkit <kind> <input> -o <output.png|svg> [--title ...]

Exits 2 on schema mismatch (with a field diff), 1 on other input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, FigureSpec, render
from .schemas import SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("input")
    parser.add_argument("-o", "--output", required=True)
    parser.add_argument("--title", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        kind=args.kind,
        input_path=Path(args.input),
        output_path=Path(args.output),
        title=args.title,
    )
    try:
        annotation = render(spec)
    except SchemaMismatch as err:
        print(f"schema mismatch: {err}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"{args.output}: {annotation}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
