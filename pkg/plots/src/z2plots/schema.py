"""Strict readers for the simulation file formats.

The column contract is fixed by the producing package and documented in its
README: time-series files carry
``t, entropy_nats, pre_norm, gauss_violation, energy, flux_0.., occ_0..``
and sweep summaries carry ``axis_value, s_sat_mean, s_sat_std, saturated``.
Any deviation is rejected with the offending column named, never repaired.
Inputs are opened read-only and never rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TIMESERIES_PREFIX = ["t", "entropy_nats", "pre_norm", "gauss_violation", "energy"]
SUMMARY_HEADER = ["axis_value", "s_sat_mean", "s_sat_std", "saturated"]


class SchemaError(ValueError):
    """A file does not match the documented column schema."""

    def __init__(self, path, column, message):
        self.path = str(path)
        self.column = column
        super().__init__(f"{path}: column {column!r}: {message}")


@dataclass
class TimeSeriesData:
    path: str
    t: np.ndarray
    entropy: np.ndarray


@dataclass
class SummaryData:
    path: str
    values: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    saturated: np.ndarray


def _split_header(line: str):
    return [name.strip() for name in line.rstrip("\n").split(",")]


def _parse_rows(path, header, fh):
    rows = []
    for lineno, line in enumerate(fh, 2):
        if not line.strip():
            continue
        cells = line.rstrip("\n").split(",")
        if len(cells) != len(header):
            raise SchemaError(
                path, header[min(len(cells), len(header) - 1)],
                f"row {lineno} has {len(cells)} cells, expected {len(header)}",
            )
        parsed = []
        for name, cell in zip(header, cells):
            try:
                parsed.append(float(cell))
            except ValueError:
                raise SchemaError(path, name, f"row {lineno}: {cell!r} is not a number") from None
        rows.append(parsed)
    if not rows:
        raise SchemaError(path, header[0], "file contains no data rows")
    return np.array(rows)


def read_timeseries(path) -> TimeSeriesData:
    """Load a trajectory file, enforcing the full column sequence."""
    with open(path, "r", encoding="utf-8") as fh:
        header = _split_header(fh.readline())
        for i, expected in enumerate(TIMESERIES_PREFIX):
            got = header[i] if i < len(header) else "<missing>"
            if got != expected:
                raise SchemaError(path, expected, f"found {got!r} at position {i}")
        tail = header[len(TIMESERIES_PREFIX):]
        n_flux = 0
        while n_flux < len(tail) and tail[n_flux] == f"flux_{n_flux}":
            n_flux += 1
        if n_flux == 0:
            got = tail[0] if tail else "<missing>"
            raise SchemaError(path, "flux_0", f"found {got!r} after the scalar columns")
        occ = tail[n_flux:]
        expected_occ = [f"occ_{i}" for i in range(n_flux + 1)]
        if occ != expected_occ:
            bad = next(
                (e for e, g in zip(expected_occ, occ + ["<missing>"] * len(expected_occ)) if e != g),
                expected_occ[0],
            )
            raise SchemaError(path, bad, f"occupation columns {occ} do not match {expected_occ}")
        data = _parse_rows(path, header, fh)
    return TimeSeriesData(path=str(path), t=data[:, 0], entropy=data[:, 1])


def read_summary(path) -> SummaryData:
    """Load a sweep summary, enforcing the four-column schema."""
    with open(path, "r", encoding="utf-8") as fh:
        header = _split_header(fh.readline())
        for i, expected in enumerate(SUMMARY_HEADER):
            got = header[i] if i < len(header) else "<missing>"
            if got != expected:
                raise SchemaError(path, expected, f"found {got!r} at position {i}")
        if len(header) != len(SUMMARY_HEADER):
            raise SchemaError(path, header[len(SUMMARY_HEADER)], "unexpected extra column")
        data = _parse_rows(path, header, fh)
    flags = data[:, 3]
    if not np.all((flags == 0) | (flags == 1)):
        raise SchemaError(path, "saturated", "flag must be 0 or 1")
    return SummaryData(
        path=str(path),
        values=data[:, 0],
        means=data[:, 1],
        stds=data[:, 2],
        saturated=flags.astype(bool),
    )


def read_fit(path) -> dict:
    """Load a fit JSON payload (model name + four parameters)."""
    import json

    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    for key in ("model", "params"):
        if key not in payload:
            raise SchemaError(path, key, "missing from fit JSON")
    if len(payload["params"]) != 4:
        raise SchemaError(path, "params", f"expected 4 parameters, got {len(payload['params'])}")
    return payload
