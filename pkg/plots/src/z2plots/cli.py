"""Command-line entry points for the two figure builders."""

from __future__ import annotations

import argparse
import sys

from .render import plot_saturation, plot_timeseries
from .schema import SchemaError


def main_timeseries(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-timeseries", description="Overlay entropy-vs-time curves from trajectory CSVs."
    )
    parser.add_argument("csv", nargs="+", help="time-series CSV files")
    parser.add_argument("--labels", help="comma-separated legend labels (default: file stems)")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    labels = [s.strip() for s in args.labels.split(",")] if args.labels else None
    try:
        info = plot_timeseries(args.csv, args.out, labels)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {info['curves']} curves to {info['out']}")
    return 0


def main_saturation(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot-saturation", description="Scatter of saturated entropy from a sweep summary."
    )
    parser.add_argument("summary", help="sweep summary CSV")
    parser.add_argument("--fit", help="fit JSON to overlay")
    parser.add_argument("--out", required=True, help="output image path")
    args = parser.parse_args(argv)
    try:
        info = plot_saturation(args.summary, args.out, args.fit)
    except (SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    suffix = " with fit overlay" if info["fit_overlay"] else ""
    print(f"wrote {info['points']} points{suffix} to {info['out']}")
    return 0


if __name__ == "__main__":
    sys.exit(main_timeseries())
