import math

import numpy as np
import pytest
import scipy.sparse as sp

from z2monitor import CouplingParams, LatticeSpec, TimeGrid, enumerate_basis
from z2monitor.model import MeasurementKind
from z2monitor.hamiltonian import HERMITIAN, SparseOperator, build_h0, build_h1, build_heff
from z2monitor.propagator import (
    PropagatorError,
    StateVector,
    dense_step,
    evolve,
    krylov_step,
    random_physical_state,
    vacuum_state,
)
from z2monitor.observables import entropy_at_cut


def _zero_op(dim):
    return SparseOperator(sp.csr_matrix((dim, dim), dtype=complex), HERMITIAN)


def _heff6(gamma=0.7, x=0.5, kind=MeasurementKind.ELECTRIC_FLUX, L=6):
    basis = enumerate_basis(LatticeSpec(L))
    params = CouplingParams(x=x, gamma=gamma, measurement=kind)
    h0 = build_h0(basis, params)
    h1 = build_h1(basis, kind)
    return basis, h0, build_heff(h0, h1, gamma)


def test_dense_step_zero_generator(rng):
    basis, _, _ = _heff6()
    psi = random_physical_state(basis, rng)
    out, diag = dense_step(psi, _zero_op(basis.dim), 0.1)
    assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-15)
    assert diag.pre_norm == pytest.approx(1.0, abs=1e-14)
    assert out.time == pytest.approx(0.1)


def test_dense_step_pure_decay(rng):
    # H_eff = -i 1: amplitudes shrink by e^{-dt} before renormalizing
    dim = 16
    heff = SparseOperator(-1j * sp.identity(dim, format="csr", dtype=complex))
    amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi = StateVector(amps / np.linalg.norm(amps))
    out, diag = dense_step(psi, heff, 0.1)
    assert diag.pre_norm == pytest.approx(math.exp(-0.1), abs=1e-14)
    assert np.allclose(out.amplitudes, psi.amplitudes, atol=1e-14)


def test_dense_energy_conservation_unitary():
    basis, h0, heff = _heff6(gamma=0.0)
    psi = vacuum_state(basis)
    e0 = h0.expectation(psi.amplitudes).real
    for _ in range(600):
        psi, diag = dense_step(psi, heff, 0.1)
        assert abs(diag.pre_norm - 1.0) < 1e-12
    e1 = h0.expectation(psi.amplitudes).real
    assert abs(e1 - e0) / abs(e0) < 1e-10


def test_dense_dimension_limit():
    dim = 5000
    heff = SparseOperator(sp.identity(dim, format="csr", dtype=complex))
    psi = StateVector(np.ones(dim, dtype=complex) / math.sqrt(dim))
    with pytest.raises(PropagatorError):
        dense_step(psi, heff, 0.1)


def test_dense_rejects_nonfinite():
    heff = _zero_op(4)
    bad = StateVector(np.array([np.nan, 0, 0, 0], dtype=complex))
    with pytest.raises(PropagatorError):
        dense_step(bad, heff, 0.1)


def test_krylov_matches_dense_single_step(rng):
    basis, _, heff = _heff6(gamma=0.7)
    psi = random_physical_state(basis, rng)
    out_k, diag_k = krylov_step(psi, heff, 0.1)
    out_d, _ = dense_step(psi, heff, 0.1)
    assert np.linalg.norm(out_k.amplitudes - out_d.amplitudes) < 1e-8
    assert diag_k.error_estimate <= 1e-10
    assert np.isfinite(diag_k.pre_norm)


def test_krylov_eigenvector_breaks_down_immediately():
    basis, h0, heff = _heff6(gamma=0.0)
    evals, evecs = np.linalg.eigh(h0.toarray())
    psi = StateVector(evecs[:, 3].astype(complex))
    out, diag = krylov_step(psi, heff, 0.1)
    assert diag.krylov_dim_used <= 2
    # evolution is a pure phase
    overlap = abs(np.vdot(psi.amplitudes, out.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_krylov_prenorm_bounds(rng):
    basis, _, heff = _heff6(gamma=1.3)
    psi = random_physical_state(basis, rng)
    for _ in range(50):
        psi, diag = krylov_step(psi, heff, 0.1, tol=1e-12)
        assert diag.pre_norm <= 1.0 + 1e-12
        assert diag.pre_norm > 0.0


def test_krylov_unitary_prenorm():
    basis, _, heff = _heff6(gamma=0.0)
    psi = vacuum_state(basis)
    for _ in range(100):
        psi, diag = krylov_step(psi, heff, 0.1, tol=1e-12)
        assert abs(diag.pre_norm - 1.0) < 1e-12


def test_krylov_substepping_strong_measurement():
    # gamma so large the full step cannot converge in one Krylov pass
    basis, h0, _ = _heff6()
    h1 = build_h1(basis, MeasurementKind.ELECTRIC_FLUX)
    heff = build_heff(h0, h1, 50.0)
    psi = random_physical_state(basis, np.random.default_rng(7))
    out_k, diag = krylov_step(psi, heff, 0.1, tol=1e-12)
    out_d, _ = dense_step(psi, heff, 0.1)
    assert np.linalg.norm(out_k.amplitudes - out_d.amplitudes) < 1e-8
    assert 0.0 < diag.pre_norm <= 1.0 + 1e-12


def test_krylov_rejects_bad_args(rng):
    basis, _, heff = _heff6()
    psi = random_physical_state(basis, rng)
    with pytest.raises(ValueError):
        krylov_step(psi, heff, -0.1)
    with pytest.raises(ValueError):
        krylov_step(psi, heff, 0.1, tol=0.0)


def test_timestep_robustness():
    # exp(-i H T) is dt-independent for a constant generator; halving dt
    # only stirs accumulated roundoff
    basis, _, heff = _heff6(gamma=0.7)
    results = []
    for dt in (0.1, 0.05):
        psi = vacuum_state(basis)
        grid = TimeGrid(dt=dt, total_time=60.0)
        final = evolve(psi, heff, grid, tol=1e-13)
        results.append(entropy_at_cut(final, basis).entropy)
    assert abs(results[0] - results[1]) < 1e-6


def test_evolve_x_zero_vacuum_stationary():
    basis = enumerate_basis(LatticeSpec(6))
    params = CouplingParams(x=0.0, gamma=0.8)
    h0 = build_h0(basis, params)
    h1 = build_h1(basis, params.measurement)
    heff = build_heff(h0, h1, params.gamma)
    psi0 = vacuum_state(basis)
    entropies = []
    fidelities = []

    def watch(step, state, diag, violation):
        entropies.append(entropy_at_cut(state, basis).entropy)
        fidelities.append(abs(np.vdot(psi0.amplitudes, state.amplitudes)) ** 2)

    evolve(psi0, heff, TimeGrid(dt=0.1, total_time=10.0), observers=(watch,), basis=basis)
    assert max(entropies) < 1e-12
    assert min(fidelities) > 1.0 - 1e-12


def test_evolve_saturation_under_measurement():
    # desk-scale qualitative check: flux monitoring tames the entropy
    basis, h0, heff = _heff6(gamma=1.0, x=0.5, L=8)
    entropies = []

    def watch(step, state, diag, violation):
        entropies.append(entropy_at_cut(state, basis).entropy)

    evolve(vacuum_state(basis), heff, TimeGrid(), observers=(watch,), basis=basis)
    late = np.array(entropies[400:])
    assert late.std() / late.mean() < 0.05


def test_evolve_no_saturation_without_measurement():
    basis, h0, heff = _heff6(gamma=0.0, x=0.5, L=8)
    entropies = []

    def watch(step, state, diag, violation):
        entropies.append(entropy_at_cut(state, basis).entropy)

    evolve(vacuum_state(basis), heff, TimeGrid(), observers=(watch,), basis=basis)
    late = np.array(entropies[400:])
    assert late.std() / late.mean() > 0.05


def test_evolve_is_deterministic():
    basis, _, heff = _heff6(gamma=0.9)
    grid = TimeGrid(dt=0.1, total_time=5.0)
    a = evolve(vacuum_state(basis), heff, grid)
    b = evolve(vacuum_state(basis), heff, grid)
    assert np.array_equal(a.amplitudes, b.amplitudes)


def test_evolve_dense_backend_matches_krylov():
    basis, _, heff = _heff6(gamma=0.7)
    grid = TimeGrid(dt=0.1, total_time=5.0)
    a = evolve(vacuum_state(basis), heff, grid, method="krylov", tol=1e-13)
    b = evolve(vacuum_state(basis), heff, grid, method="dense")
    assert np.linalg.norm(a.amplitudes - b.amplitudes) < 1e-9


def test_evolve_rejects_unnormalized(rng):
    basis, _, heff = _heff6()
    bad = StateVector(np.ones(basis.dim, dtype=complex))
    with pytest.raises(ValueError):
        evolve(bad, heff, TimeGrid(dt=0.1, total_time=1.0))


def test_evolve_observer_times():
    basis, _, heff = _heff6()
    seen = []

    def watch(step, state, diag, violation):
        seen.append((step, state.time))

    evolve(vacuum_state(basis), heff, TimeGrid(dt=0.1, total_time=1.0), observers=(watch,))
    assert seen[0] == (1, pytest.approx(0.1))
    assert seen[-1] == (10, pytest.approx(1.0))
