"""Single-step propagation under exp(-i * H_eff * dt) with renormalization.

Two routes are provided and cross-checked in the tests: a dense matrix
exponential (scaling-and-squaring Pade, the small-system oracle) and an
Arnoldi-projected exponential for production runs.  The generator is
non-normal whenever the measurement rate is nonzero, so the Krylov route
uses full Arnoldi orthogonalization (modified Gram-Schmidt with one
reorthogonalization pass) rather than any short-recurrence shortcut.

Every public step renormalizes; the norm of the raw propagated vector is
reported as ``pre_norm``, the surviving no-click weight of the step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import TimeGrid
from .basis import PhysicalBasis, gauss_check
from .hamiltonian import SparseOperator

__all__ = [
    "StateVector",
    "StepDiagnostics",
    "PropagatorError",
    "GaussLawViolationError",
    "vacuum_state",
    "random_physical_state",
    "dense_step",
    "krylov_step",
    "evolve",
]

DENSE_DIM_LIMIT = 4096
KRYLOV_M_MAX = 40
_MAX_HALVINGS = 16
_BREAKDOWN_TOL = 1e-14


class PropagatorError(RuntimeError):
    """The step could not reach the requested accuracy."""


class GaussLawViolationError(RuntimeError):
    """Evolution left the gauge-invariant sector."""


@dataclass
class StateVector:
    """Normalized amplitudes over a physical basis, tagged with sim time."""

    amplitudes: np.ndarray
    time: float = 0.0

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.amplitudes / self.norm(), self.time)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.time)


@dataclass
class StepDiagnostics:
    """Per-step bookkeeping.

    ``pre_norm`` is the norm of the propagated vector before renormalizing
    (== 1 for unitary evolution, <= 1 under measurement).  For Krylov steps
    ``krylov_dim_used`` is the largest subspace built and
    ``error_estimate`` the accumulated residual bound; both are zero for the
    dense route.
    """

    pre_norm: float
    krylov_dim_used: int = 0
    error_estimate: float = 0.0


def vacuum_state(basis: PhysicalBasis) -> StateVector:
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.vacuum_index] = 1.0
    return StateVector(amps, 0.0)


def random_physical_state(basis: PhysicalBasis, rng=None) -> StateVector:
    """Haar-ish random normalized state over the reduced basis (test helper)."""
    rng = np.random.default_rng(rng)
    amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    return StateVector(amps / np.linalg.norm(amps), 0.0)


def _as_matrix(heff) -> "np.ndarray | object":
    return heff.matrix if isinstance(heff, SparseOperator) else heff


def dense_propagator_matrix(heff, dt: float) -> np.ndarray:
    """exp(-i * dt * H_eff) as a dense matrix (oracle scale only)."""
    m = _as_matrix(heff)
    dim = m.shape[0]
    if dim > DENSE_DIM_LIMIT:
        raise PropagatorError(f"dense exponential limited to dim <= {DENSE_DIM_LIMIT}, got {dim}")
    dense = m.toarray() if hasattr(m, "toarray") else np.asarray(m)
    return scipy.linalg.expm(-1j * dt * dense)


def dense_step(state: StateVector, heff, dt: float):
    """One renormalized step via the dense matrix exponential."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not np.all(np.isfinite(state.amplitudes)):
        raise PropagatorError("state contains non-finite amplitudes")
    u = dense_propagator_matrix(heff, dt)
    return _apply_dense(state, u, dt)


def _apply_dense(state: StateVector, u: np.ndarray, dt: float):
    raw = u @ state.amplitudes
    pre_norm = float(np.linalg.norm(raw))
    if not np.isfinite(pre_norm) or pre_norm == 0.0:
        raise PropagatorError(f"propagated norm is {pre_norm}")
    out = StateVector(raw / pre_norm, state.time + dt)
    return out, StepDiagnostics(pre_norm=pre_norm / state.norm())


def _arnoldi_expmv(matvec, v: np.ndarray, tol: float, m_max: int):
    """Approximate exp(A) v in a Krylov subspace of dimension <= m_max.

    Returns (w, m_used, error_estimate) on convergence or (None, m_max, err)
    when the residual bound never falls under ``tol``.  A vanishing
    subdiagonal element means the subspace is invariant and the projected
    exponential is exact.
    """
    beta = np.linalg.norm(v)
    n = len(v)
    basis = np.empty((m_max + 1, n), dtype=complex)
    hess = np.zeros((m_max + 1, m_max), dtype=complex)
    basis[0] = v / beta
    err = np.inf
    for j in range(m_max):
        w = matvec(basis[j])
        w_scale = np.linalg.norm(w)
        for k in range(j + 1):
            h = np.vdot(basis[k], w)
            hess[k, j] += h
            w -= h * basis[k]
        for k in range(j + 1):   # one reorthogonalization pass
            c = np.vdot(basis[k], w)
            hess[k, j] += c
            w -= c * basis[k]
        h_next = np.linalg.norm(w)
        hess[j + 1, j] = h_next
        m = j + 1
        small_exp = scipy.linalg.expm(hess[:m, :m])
        y = small_exp[:, 0]
        err = beta * h_next * abs(y[m - 1])
        if h_next <= _BREAKDOWN_TOL * max(1.0, w_scale):
            return beta * (basis[:m].T @ y), m, 0.0
        if err < tol:
            return beta * (basis[:m].T @ y), m, float(err)
        basis[j + 1] = w / h_next
    return None, m_max, float(err)


def _krylov_apply(matrix, amps: np.ndarray, dt: float, tol: float, m_max: int, depth: int):
    """exp(-i*dt*matrix) amps with internal step halving on tolerance failure.

    Returns (raw_result, pre_norm_factor, max_dim, error_sum); the raw
    result is renormalized by the caller.  Halved substeps renormalize in
    between, which commutes with the overall scalar normalization.
    """
    w, m, err = _arnoldi_expmv(lambda u: -1j * dt * (matrix @ u), amps, tol, m_max)
    if w is not None:
        pre = float(np.linalg.norm(w))
        return w, pre, m, err
    if depth >= _MAX_HALVINGS:
        raise PropagatorError(
            f"Krylov step failed to reach tol={tol} after {depth} halvings "
            f"(last residual estimate {err:.3e})"
        )
    half = dt / 2.0
    w1, pre1, m1, err1 = _krylov_apply(matrix, amps, half, tol / 2.0, m_max, depth + 1)
    w1 = w1 / np.linalg.norm(w1)
    w2, pre2, m2, err2 = _krylov_apply(matrix, w1, half, tol / 2.0, m_max, depth + 1)
    return w2, pre1 * pre2, max(m1, m2), err1 + err2


def krylov_step(state: StateVector, heff, dt: float, tol: float = 1e-10, m_max: int = KRYLOV_M_MAX):
    """One renormalized Arnoldi step; halves dt internally if needed."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    amps = state.amplitudes
    if not np.all(np.isfinite(amps)):
        raise PropagatorError("state contains non-finite amplitudes")
    matrix = _as_matrix(heff)
    raw, pre_norm, m_used, err = _krylov_apply(matrix, amps, dt, tol, m_max, 0)
    norm_in = float(np.linalg.norm(amps))
    out = StateVector(raw / np.linalg.norm(raw), state.time + dt)
    return out, StepDiagnostics(
        pre_norm=pre_norm / norm_in, krylov_dim_used=m_used, error_estimate=err
    )


def evolve(
    initial: StateVector,
    heff,
    grid: TimeGrid,
    observers=(),
    *,
    method: str = "krylov",
    tol: float = 1e-12,
    m_max: int = KRYLOV_M_MAX,
    basis: PhysicalBasis | None = None,
    gauss_every: int = 1,
    gauss_abort: float = 1e-8,
) -> StateVector:
    """Drive the full trajectory, invoking observers after every step.

    Observers are callables ``(step_index, state, diagnostics, gauss_violation)``;
    the violation is refreshed every ``gauss_every`` steps when a basis is
    supplied (carried forward in between) and None otherwise.  Crossing
    ``gauss_abort`` raises :class:`GaussLawViolationError`.  The trajectory
    is deterministic: identical inputs reproduce identical outputs in a
    fixed floating-point environment.
    """
    if abs(initial.norm() - 1.0) > 1e-8:
        raise ValueError("initial state must be normalized")
    if method not in ("krylov", "dense"):
        raise ValueError(f"unknown propagation method {method!r}")
    if gauss_every < 1:
        raise ValueError("gauss_every must be >= 1")

    dt = grid.dt
    dense_u = dense_propagator_matrix(heff, dt) if method == "dense" else None
    matrix = _as_matrix(heff)

    state = StateVector(initial.amplitudes.copy(), 0.0)
    violation = gauss_check(state, basis) if basis is not None else None
    for step in range(1, grid.n_steps + 1):
        if dense_u is not None:
            state, diag = _apply_dense(state, dense_u, dt)
        else:
            raw, pre, m_used, err = _krylov_apply(matrix, state.amplitudes, dt, tol, m_max, 0)
            state = StateVector(raw / np.linalg.norm(raw), 0.0)
            diag = StepDiagnostics(pre_norm=pre, krylov_dim_used=m_used, error_estimate=err)
        state.time = step * dt   # exact grid time, no accumulation drift
        if basis is not None and step % gauss_every == 0:
            violation = gauss_check(state, basis)
            if violation > gauss_abort:
                raise GaussLawViolationError(
                    f"gauge violation {violation:.3e} exceeds {gauss_abort:.1e} at t={state.time}"
                )
        for obs in observers:
            obs(step, state, diag, violation)
    return state
