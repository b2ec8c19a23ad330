"""Command-line entry point: esplot <trajectory.csv> --out DIR."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .render import ALL_FIGURES, EmptyPlotError, PlotJob, SchemaError, render


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="esplot",
        description="render tracking/output/frequency figures from an "
                    "estrack trajectory CSV")
    parser.add_argument("csv", help="trajectory.csv path")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--which", default=",".join(ALL_FIGURES),
                        help="comma-separated subset of "
                             f"{','.join(ALL_FIGURES)}")
    parser.add_argument("--style", default="linear",
                        choices=["linear", "log-y"],
                        help="add log-scale error overlays with log-y")
    args = parser.parse_args(argv)

    csv_path = Path(args.csv)
    if not csv_path.exists():
        print(f"no such file: {csv_path}", file=sys.stderr)
        return 2
    which = tuple(w.strip() for w in args.which.split(",") if w.strip())
    try:
        job = PlotJob(csv_path=csv_path, out_dir=Path(args.out), which=which,
                      style=args.style)
        written = render(job)
    except (SchemaError, EmptyPlotError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
