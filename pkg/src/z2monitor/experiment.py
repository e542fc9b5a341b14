"""Run orchestration: single trajectories, parameter sweeps, fits, self-checks.

File formats
------------
Time-series CSV columns, in this exact order::

    t, entropy_nats, pre_norm, gauss_violation, energy,
    flux_0 .. flux_{L-2}, occ_0 .. occ_{L-1}

Sweep summary CSV columns::

    axis_value, s_sat_mean, s_sat_std, saturated(0|1)

All floats are printed with 17 significant digits so that parsing recovers
the exact binary values and repeated runs are byte-identical.  Failed sweep
points keep their summary row with ``nan`` statistics and saturated = 0.
"""

from __future__ import annotations

import json
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.optimize

from .model import ConfigError, CouplingParams, LatticeSpec, TimeGrid
from .basis import derive_links, enumerate_basis, unpack_bits
from .hamiltonian import build_h0, build_h1, build_heff
from .propagator import (
    dense_step,
    krylov_step,
    evolve,
    random_physical_state,
    vacuum_state,
)
from .observables import (
    TimeSeries,
    TrajectoryRecorder,
    default_cut,
    entropy_at_cut,
    entropy_cut_assignment_check,
    is_saturated,
    time_average,
)
from . import fullspace

__all__ = [
    "RunConfig",
    "SweepPoint",
    "SweepResult",
    "FitResult",
    "FIT_MODELS",
    "run_trajectory",
    "run_single",
    "run_sweep",
    "fit_saturation",
    "verify",
    "write_timeseries_csv",
    "read_timeseries_csv",
    "write_summary_csv",
    "read_summary_csv",
    "sweep_point_filename",
    "load_config_file",
]

SWEEP_AXES = ("gamma", "x", "L")
VERIFY_MAX_L = 8
_FLOAT_FMT = "{:.17g}"


@dataclass(frozen=True)
class RunConfig:
    """Everything one trajectory needs; immutable and shareable."""

    lattice: LatticeSpec
    params: CouplingParams
    grid: TimeGrid = TimeGrid()
    cut_bond: int | None = None
    window: tuple | None = None
    method: str = "krylov"
    tol: float = 1e-12
    gauss_every: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.method not in ("krylov", "dense"):
            raise ConfigError(f"unknown propagation method {self.method!r}")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        if self.gauss_every < 1:
            raise ConfigError("gauss_every must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        cut = self.effective_cut
        if not 0 <= cut <= self.lattice.L - 2:
            raise ConfigError(f"cut bond {cut} outside 0..{self.lattice.L - 2}")
        t1, t2 = self.effective_window
        if not 0 <= t1 < t2 <= self.grid.total_time + 1e-9:
            raise ConfigError(f"window ({t1}, {t2}) outside the run time span")

    @property
    def effective_cut(self) -> int:
        return default_cut(self.lattice.L) if self.cut_bond is None else self.cut_bond

    @property
    def effective_window(self) -> tuple:
        if self.window is not None:
            return (float(self.window[0]), float(self.window[1]))
        t_end = self.grid.total_time
        return (max(0.0, t_end - 20.0), t_end)


def run_trajectory(config: RunConfig) -> TimeSeries:
    """Quench from the vacuum and record every step; no file output."""
    basis = enumerate_basis(config.lattice)
    h0 = build_h0(basis, config.params)
    h1 = build_h1(basis, config.params.measurement)
    heff = build_heff(h0, h1, config.params.gamma)
    recorder = TrajectoryRecorder(basis, h0, config.effective_cut)
    state = vacuum_state(basis)
    recorder.record_initial(state)
    evolve(
        state,
        heff,
        config.grid,
        observers=(recorder,),
        method=config.method,
        tol=config.tol,
        basis=basis,
        gauss_every=config.gauss_every,
    )
    return recorder.finish()


# ---------------------------------------------------------------- CSV layer


def _timeseries_header(L: int) -> list:
    return (
        ["t", "entropy_nats", "pre_norm", "gauss_violation", "energy"]
        + [f"flux_{i}" for i in range(L - 1)]
        + [f"occ_{i}" for i in range(L)]
    )


def write_timeseries_csv(series: TimeSeries, path) -> None:
    """Write the trajectory atomically (temp file + rename)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(_timeseries_header(series.L)) + "\n")
        for k in range(len(series.t)):
            row = [
                series.t[k],
                series.entropy[k],
                series.pre_norm[k],
                series.gauss_violation[k],
                series.energy[k],
                *series.flux[k],
                *series.occupation[k],
            ]
            fh.write(",".join(_FLOAT_FMT.format(v) for v in row) + "\n")
    os.replace(tmp, path)


def read_timeseries_csv(path) -> TimeSeries:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.array([[float(v) for v in line.split(",")] for line in fh if line.strip()])
    n_flux = sum(1 for name in header if name.startswith("flux_"))
    L = n_flux + 1
    expected = _timeseries_header(L)
    if header != expected:
        raise ValueError(f"unexpected time-series header {header}")
    return TimeSeries(
        t=data[:, 0],
        entropy=data[:, 1],
        pre_norm=data[:, 2],
        gauss_violation=data[:, 3],
        energy=data[:, 4],
        flux=data[:, 5 : 5 + n_flux],
        occupation=data[:, 5 + n_flux :],
    )


def run_single(config: RunConfig, out_path) -> TimeSeries:
    """Run one trajectory and persist it; nothing is written on failure."""
    series = run_trajectory(config)
    write_timeseries_csv(series, out_path)
    return series


# ------------------------------------------------------------------- sweeps


@dataclass
class SweepPoint:
    value: float
    s_sat_mean: float
    s_sat_std: float
    saturated: bool
    error: str | None = None


@dataclass
class SweepResult:
    axis: str
    points: list
    fit: "FitResult | None" = None


def _config_at(base: RunConfig, axis: str, value) -> RunConfig:
    if axis == "gamma":
        return replace(base, params=replace(base.params, gamma=float(value)))
    if axis == "x":
        return replace(base, params=replace(base.params, x=float(value)))
    if axis == "L":
        L = int(value)
        cut = None if base.cut_bond is None else base.cut_bond
        return replace(base, lattice=LatticeSpec(L), cut_bond=cut)
    raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def sweep_point_filename(axis: str, value) -> str:
    """Deterministic per-point time-series filename."""
    text = f"{value:g}".replace("-", "m").replace(".", "p")
    return f"{axis}_{text}.csv"


def run_sweep(base: RunConfig, axis: str, values, out_dir=None) -> SweepResult:
    """Run every point of a one-parameter sweep and summarize saturation.

    Points are dispatched to a bounded thread pool (``base.workers``); each
    worker owns its trajectory end to end and results land in a lock-guarded
    list, so parallel and serial execution produce identical files.  A
    failing point is recorded and the remaining points still run.
    """
    values = list(values)
    if not values:
        raise ConfigError("sweep needs a nonempty list of values")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)

    results: dict = {}
    lock = threading.Lock()

    def worker(value):
        try:
            config = _config_at(base, axis, value)
            series = run_trajectory(config)
            mean, std = time_average(series.t, series.entropy, config.effective_window)
            point = SweepPoint(float(value), mean, std, is_saturated(mean, std))
            if out_dir is not None:
                write_timeseries_csv(series, os.path.join(out_dir, sweep_point_filename(axis, value)))
        except Exception as exc:   # keep the rest of the sweep alive
            point = SweepPoint(float(value), math.nan, math.nan, False, error=str(exc))
        with lock:
            results[float(value)] = point

    if base.workers == 1:
        for v in values:
            worker(v)
    else:
        with ThreadPoolExecutor(max_workers=base.workers) as pool:
            list(pool.map(worker, values))

    points = [results[float(v)] for v in sorted(values, key=float)]
    result = SweepResult(axis=axis, points=points)
    if out_dir is not None:
        write_summary_csv(result, os.path.join(out_dir, "summary.csv"))
    return result


def write_summary_csv(result: SweepResult, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write("axis_value,s_sat_mean,s_sat_std,saturated\n")
        for p in result.points:
            fields = [_FLOAT_FMT.format(v) for v in (p.value, p.s_sat_mean, p.s_sat_std)]
            fh.write(",".join(fields) + f",{1 if p.saturated else 0}\n")
    os.replace(tmp, path)


def read_summary_csv(path) -> SweepResult:
    points = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "axis_value,s_sat_mean,s_sat_std,saturated":
            raise ValueError(f"unexpected summary header {header!r}")
        for line in fh:
            if not line.strip():
                continue
            v, m, s, sat = line.strip().split(",")
            points.append(SweepPoint(float(v), float(m), float(s), sat == "1"))
    return SweepResult(axis="", points=points)


# --------------------------------------------------------------------- fits


def _model_exp_offset(v, a, b, c, d):
    return a + b * np.exp(-c * v) + d * v


def _model_power_exp(v, a, b, c, d):
    return a * np.power(np.maximum(v, 1e-12), b) * np.exp(-c * v) + d


def _model_rational(v, a, b, c, d):
    return (a + b * v) / (1.0 + c * v) + d * v


FIT_MODELS = {
    "exp_offset": _model_exp_offset,     # a + b*exp(-c*v) + d*v
    "power_exp": _model_power_exp,       # a*v^b*exp(-c*v) + d
    "rational": _model_rational,         # (a + b*v)/(1 + c*v) + d*v
}


@dataclass
class FitResult:
    model: str
    params: tuple
    residual_norm: float
    covariance_diag: tuple
    converged: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "params": list(self.params),
                "residual_norm": self.residual_norm,
                "covariance_diag": list(self.covariance_diag),
                "converged": self.converged,
            },
            indent=2,
        )


def _initial_guess(model: str, v: np.ndarray, y: np.ndarray) -> np.ndarray:
    span = max(v.max() - v.min(), 1e-6)
    if model == "exp_offset":
        return np.array([y[-1], y[0] - y[-1], 1.0 / span, 0.0])
    if model == "power_exp":
        return np.array([max(abs(y).max(), 1e-3), 0.5, 1.0 / span, y[-1]])
    return np.array([y[0], 0.0, 1.0 / span, 0.0])


def fit_saturation(values, s_means, model: str = "exp_offset") -> FitResult:
    """Least-squares fit of a four-parameter model to saturation data.

    Uses Levenberg-Marquardt; if the optimizer reports failure the
    best-so-far parameters are returned flagged as not converged.
    """
    if model not in FIT_MODELS:
        raise ConfigError(f"unknown fit model {model!r}; choose from {sorted(FIT_MODELS)}")
    v = np.asarray(values, dtype=float)
    y = np.asarray(s_means, dtype=float)
    if len(v) < 5:
        raise ConfigError(f"fit needs at least 5 points, got {len(v)}")
    func = FIT_MODELS[model]

    def residuals(p):
        return func(v, *p) - y

    res = scipy.optimize.least_squares(residuals, _initial_guess(model, v, y), method="lm")
    dof = max(len(v) - 4, 1)
    jtj = res.jac.T @ res.jac
    try:
        cov = np.linalg.pinv(jtj) * (2.0 * res.cost / dof)
        cov_diag = tuple(float(c) for c in np.diag(cov))
    except np.linalg.LinAlgError:
        cov_diag = (math.nan,) * 4
    return FitResult(
        model=model,
        params=tuple(float(p) for p in res.x),
        residual_norm=float(np.linalg.norm(res.fun)),
        covariance_diag=cov_diag,
        converged=bool(res.success),
    )


# ------------------------------------------------------------- self checks


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class VerifyReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self):
        for c in self.checks:
            yield f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}"


def verify(config: RunConfig) -> VerifyReport:
    """Cross-check the reduced machinery against full-space brute force.

    Refuses lattices above L = 8: the checks embed states in the full
    2^(2L-1)-dimensional space.
    """
    L = config.lattice.L
    if L > VERIFY_MAX_L:
        raise ConfigError(f"verification runs brute-force oracles; L must be <= {VERIFY_MAX_L}")
    checks = []
    basis = enumerate_basis(config.lattice)
    params = config.params
    rng = np.random.default_rng(20240811)

    # Basis: every (matter, derived links) pair must be the unique link
    # assignment accepted by the explicit gauge generators.
    gs = fullspace.build_gauss_operators(config.lattice)
    g_diags = [np.real(g.diagonal()) for g in gs]
    n_links = L - 1
    solutions = 0
    matter_all = unpack_bits(np.arange(1 << L), L)
    for bits in matter_all:
        hits = []
        for link_code in range(1 << n_links):
            links = unpack_bits(np.array([link_code]), n_links)[0]
            idx = fullspace_index(bits, links)
            if all(abs(d[idx] - 1.0) < 1e-12 for d in g_diags):
                hits.append(links)
        if len(hits) > 1:
            checks.append(CheckResult("basis-enumeration", False, f"non-unique links for {bits}"))
            break
        if hits:
            solutions += 1
            expected = derive_links(bits)
            if not np.array_equal(hits[0], expected):
                checks.append(
                    CheckResult("basis-enumeration", False, f"derived links disagree for {bits}")
                )
                break
    else:
        ok = solutions == basis.dim == 1 << (L - 1)
        checks.append(
            CheckResult(
                "basis-enumeration",
                ok,
                f"{solutions} gauge-invariant configurations, expected {1 << (L - 1)}",
            )
        )

    # Hamiltonian: reduced build equals the projected full-space build.
    h0 = build_h0(basis, params)
    h_full = fullspace.build_full_h0(config.lattice, params)
    p = fullspace.projector(basis)
    projected = (p.T @ h_full @ p).toarray()
    dev = float(np.abs(projected - h0.toarray()).max())
    checks.append(CheckResult("hamiltonian-projection", dev < 1e-13, f"max entry deviation {dev:.2e}"))

    comm_dev = 0.0
    for g in gs:
        comm_dev = max(comm_dev, float(np.abs((h_full @ g - g @ h_full)).max()))
    checks.append(CheckResult("gauge-commutation", comm_dev < 1e-13, f"max |[H, G_i]| {comm_dev:.2e}"))

    # Propagation: Krylov against the dense exponential on a short run.
    h1 = build_h1(basis, params.measurement)
    gamma = params.gamma if params.gamma > 0 else 0.7
    heff = build_heff(h0, h1, gamma)
    state_k = random_physical_state(basis, rng)
    state_d = state_k.copy()
    worst = 0.0
    for _ in range(100):
        state_k, _ = krylov_step(state_k, heff, config.grid.dt, tol=1e-12)
        state_d, _ = dense_step(state_d, heff, config.grid.dt)
        worst = max(worst, float(np.linalg.norm(state_k.amplitudes - state_d.amplitudes)))
    checks.append(
        CheckResult("propagator-cross-check", worst < 1e-8, f"max step deviation {worst:.2e}")
    )

    # Entropy: blocked SVD against the full-space density matrix, both
    # cut-link assignments.
    worst_ent = 0.0
    for _ in range(20):
        psi = random_physical_state(basis, rng)
        s_blocked = entropy_at_cut(psi, basis, config.effective_cut).entropy
        s_a, s_b = entropy_cut_assignment_check(psi, basis, config.effective_cut)
        worst_ent = max(worst_ent, abs(s_blocked - s_a), abs(s_blocked - s_b), abs(s_a - s_b))
    checks.append(
        CheckResult("entropy-oracle", worst_ent < 1e-10, f"max entropy deviation {worst_ent:.2e}")
    )

    # Gauge conservation along an actual evolved trajectory.
    short = replace(config, grid=TimeGrid(config.grid.dt, min(10.0, config.grid.total_time)))
    series = run_trajectory(short)
    worst_gauss = float(series.gauss_violation.max())
    checks.append(
        CheckResult("gauss-conservation", worst_gauss < 1e-10, f"max violation {worst_gauss:.2e}")
    )

    return VerifyReport(checks)


def fullspace_index(matter_bits, link_bits) -> int:
    """Tensor index of a (matter, links) configuration, interleaved layout."""
    L = len(matter_bits)
    n = 2 * L - 1
    idx = 0
    for i in range(L):
        idx |= int(matter_bits[i]) << (n - 1 - 2 * i)
    for j in range(L - 1):
        idx |= int(link_bits[j]) << (n - 1 - (2 * j + 1))
    return idx


# ------------------------------------------------------------- config files


CONFIG_KEYS = {
    "L": int,
    "x": float,
    "m_over_g": float,
    "gamma": float,
    "measure": str,
    "dt": float,
    "T": float,
    "cut": int,
    "window": str,
    "workers": int,
    "method": str,
    "tol": float,
    "gauss_every": int,
    "out": str,
    "axis": str,
    "values": str,
    "model": str,
}


def load_config_file(path) -> dict:
    """Parse a flat ``key = value`` file; '#' starts a comment."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return out
