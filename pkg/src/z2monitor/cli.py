"""Command-line driver: run, sweep, fit, verify.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys

from .model import ConfigError, CouplingParams, LatticeSpec, TimeGrid
from .propagator import GaussLawViolationError, PropagatorError
from . import experiment

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file; flags override it")
    parser.add_argument("--L", type=int, help="number of matter sites (even, >= 4)")
    parser.add_argument("--x", type=float, help="hopping coupling x >= 0")
    parser.add_argument("--m-over-g", dest="m_over_g", type=float, help="mass ratio (default 1)")
    parser.add_argument("--gamma", type=float, help="measurement rate >= 0")
    parser.add_argument("--measure", choices=["flux", "density"], help="monitored observable")
    parser.add_argument("--dt", type=float, help="time step (default 0.1)")
    parser.add_argument("--T", type=float, help="total evolution time (default 60)")
    parser.add_argument("--cut", type=int, help="entanglement cut bond (default L/2 - 1)")
    parser.add_argument("--window", help="saturation window t1:t2 (default T-20:T)")
    parser.add_argument("--workers", type=int, help="sweep worker threads (default 1)")
    parser.add_argument("--method", choices=["krylov", "dense"], help="propagator backend")
    parser.add_argument("--tol", type=float, help="Krylov tolerance (default 1e-12)")
    parser.add_argument("--gauss-every", dest="gauss_every", type=int, help="constraint check cadence")
    parser.add_argument("--out", help="output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="z2monitor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single trajectory -> time-series CSV")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="one-parameter sweep -> summary + per-point CSVs")
    _add_common(p_sweep)
    p_sweep.add_argument("--axis", choices=list(experiment.SWEEP_AXES), help="swept parameter")
    p_sweep.add_argument("--values", help="comma-separated sweep values")

    p_fit = sub.add_parser("fit", help="fit a saturation model to a sweep summary CSV")
    p_fit.add_argument("summary", help="sweep summary CSV")
    p_fit.add_argument("--model", choices=sorted(experiment.FIT_MODELS), default="exp_offset")
    p_fit.add_argument("--out", help="output JSON path (default: print)")

    p_verify = sub.add_parser("verify", help="run the brute-force oracle suite (L <= 8)")
    _add_common(p_verify)
    return parser


def _merged(args: argparse.Namespace) -> dict:
    """Defaults < config file < explicit flags."""
    merged = {}
    if getattr(args, "config", None):
        merged.update(experiment.load_config_file(args.config))
    for key in experiment.CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


def _parse_window(text):
    try:
        t1, t2 = text.split(":")
        return (float(t1), float(t2))
    except ValueError as exc:
        raise ConfigError(f"window must look like t1:t2, got {text!r}") from exc


def _run_config(merged: dict) -> experiment.RunConfig:
    if "L" not in merged:
        raise ConfigError("lattice size --L is required")
    if "x" not in merged:
        raise ConfigError("coupling --x is required")
    window = _parse_window(merged["window"]) if "window" in merged else None
    return experiment.RunConfig(
        lattice=LatticeSpec(merged["L"]),
        params=CouplingParams(
            x=merged["x"],
            gamma=merged.get("gamma", 0.0),
            m_over_g=merged.get("m_over_g", 1.0),
            measurement=merged.get("measure", "flux"),
        ),
        grid=TimeGrid(dt=merged.get("dt", 0.1), total_time=merged.get("T", 60.0)),
        cut_bond=merged.get("cut"),
        window=window,
        method=merged.get("method", "krylov"),
        tol=merged.get("tol", 1e-12),
        gauss_every=merged.get("gauss_every", 1),
        workers=merged.get("workers", 1),
    )


def _cmd_run(args) -> int:
    merged = _merged(args)
    config = _run_config(merged)
    out = merged.get("out", "timeseries.csv")
    series = experiment.run_single(config, out)
    print(f"wrote {len(series.t)} rows to {out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    merged = _merged(args)
    axis = merged.get("axis")
    values_text = merged.get("values")
    if not axis or not values_text:
        raise ConfigError("sweep needs --axis and --values")
    try:
        values = [float(v) for v in str(values_text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {exc}") from exc
    if axis == "L" and "L" not in merged:
        merged["L"] = int(values[0])
    config = _run_config(merged)
    out_dir = merged.get("out", "sweep_out")
    result = experiment.run_sweep(config, axis, values, out_dir)
    failures = [p for p in result.points if p.error]
    for p in failures:
        print(f"point {axis}={p.value:g} failed: {p.error}", file=sys.stderr)
    print(f"wrote summary for {len(result.points)} points to {out_dir}/summary.csv")
    return EXIT_NUMERICAL if failures else EXIT_OK


def _cmd_fit(args) -> int:
    summary = experiment.read_summary_csv(args.summary)
    values = [p.value for p in summary.points]
    means = [p.s_sat_mean for p in summary.points]
    fit = experiment.fit_saturation(values, means, args.model)
    text = fit.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"wrote fit to {args.out}")
    else:
        print(text)
    if not fit.converged:
        print("warning: fit did not converge; parameters are unreliable", file=sys.stderr)
    return EXIT_OK


def _cmd_verify(args) -> int:
    merged = _merged(args)
    merged.setdefault("L", 6)
    merged.setdefault("x", 0.5)
    merged.setdefault("gamma", 0.5)
    config = _run_config(merged)
    report = experiment.verify(config)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.passed else EXIT_VERIFY


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # argparse usage errors -> config exit code
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "fit": _cmd_fit, "verify": _cmd_verify}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PropagatorError, GaussLawViolationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
