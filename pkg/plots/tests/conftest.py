import math

import pytest

L = 6


def timeseries_text(gamma, n_rows=61, L=L):
    """Synthetic trajectory file obeying the documented schema."""
    header = (
        ["t", "entropy_nats", "pre_norm", "gauss_violation", "energy"]
        + [f"flux_{i}" for i in range(L - 1)]
        + [f"occ_{i}" for i in range(L)]
    )
    lines = [",".join(header)]
    for k in range(n_rows):
        t = 0.1 * k
        entropy = (1.0 - math.exp(-gamma * t)) * 0.5 / (1.0 + gamma)
        row = [t, entropy, math.exp(-0.01 * gamma), 0.0, -12.34]
        row += [0.01 * gamma] * (L - 1)
        row += [0.02 * gamma] * L
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def summary_text(rows):
    lines = ["axis_value,s_sat_mean,s_sat_std,saturated"]
    for value, mean, std, flag in rows:
        lines.append(f"{value:.17g},{mean:.17g},{std:.17g},{flag}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def four_series(tmp_path):
    paths = []
    for gamma in (0.25, 0.5, 1.0, 2.0):
        stem = f"{gamma:g}".replace(".", "p")
        path = tmp_path / f"gamma_{stem}.csv"
        path.write_text(timeseries_text(gamma))
        paths.append(path)
    return paths


@pytest.fixture
def summary_file(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_text(
        summary_text(
            [
                (0.25, 0.40, 0.01, 1),
                (0.5, 0.30, 0.01, 1),
                (1.0, 0.20, 0.02, 1),
                (2.0, 0.12, 0.05, 0),
            ]
        )
    )
    return path


@pytest.fixture
def fit_file(tmp_path):
    path = tmp_path / "fit.json"
    path.write_text(
        '{"model": "exp_offset", "params": [0.1, 0.35, 1.2, -0.01],'
        ' "residual_norm": 0.001, "covariance_diag": [0, 0, 0, 0], "converged": true}\n'
    )
    return path
