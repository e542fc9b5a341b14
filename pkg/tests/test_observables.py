import math

import numpy as np
import pytest

from z2monitor import CouplingParams, TimeGrid
from z2monitor.model import MeasurementKind, vacuum_bits
from z2monitor.hamiltonian import build_h0, build_h1, build_heff
from z2monitor.propagator import evolve, random_physical_state, vacuum_state
from z2monitor.observables import (
    BipartitionSpec,
    TrajectoryRecorder,
    default_cut,
    entropy_at_cut,
    entropy_cut_assignment_check,
    is_saturated,
    local_expectations,
    time_average,
)
from z2monitor import fullspace


def _pair_state(basis, sites):
    bits = vacuum_bits(basis.L)
    for s in sites:
        bits[s] ^= 1
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.vacuum_index] = 1 / math.sqrt(2)
    amps[basis.index_of(bits)] = 1 / math.sqrt(2)
    return amps


def test_vacuum_entropy_zero(basis6):
    res = entropy_at_cut(vacuum_state(basis6), basis6)
    assert res.entropy == 0.0
    assert len(res.schmidt_spectrum[res.schmidt_spectrum > 1e-16]) == 1
    assert res.schmidt_spectrum[0] == pytest.approx(1.0, abs=1e-14)


def test_equal_superposition_across_cut_gives_ln2(basis6):
    # vacuum plus a pair straddling the central bond live in different cut
    # flux sectors: two equal Schmidt weights
    amps = _pair_state(basis6, (2, 3))
    res = entropy_at_cut(amps, basis6)
    assert res.entropy == pytest.approx(math.log(2.0), abs=1e-12)
    assert res.sector_sizes == (1, 1)
    s_a, s_b = entropy_cut_assignment_check(amps, basis6)
    assert s_a == pytest.approx(math.log(2.0), abs=1e-12)
    assert s_b == pytest.approx(math.log(2.0), abs=1e-12)


def test_blocked_entropy_matches_fullspace_oracle(basis6, rng):
    for _ in range(20):
        psi = random_physical_state(basis6, rng)
        blocked = entropy_at_cut(psi, basis6).entropy
        oracle_a = fullspace.entropy_full(psi, basis6, default_cut(6), link_in_a=True)
        oracle_b = fullspace.entropy_full(psi, basis6, default_cut(6), link_in_a=False)
        assert blocked == pytest.approx(oracle_a, abs=1e-10)
        assert blocked == pytest.approx(oracle_b, abs=1e-10)


def test_blocked_entropy_matches_oracle_off_center(basis6, rng):
    for cut in range(5):
        psi = random_physical_state(basis6, rng)
        blocked = entropy_at_cut(psi, basis6, cut).entropy
        oracle = fullspace.entropy_full(psi, basis6, cut, link_in_a=False)
        assert blocked == pytest.approx(oracle, abs=1e-10)


def test_cut_assignment_agreement(basis6, rng):
    for _ in range(10):
        psi = random_physical_state(basis6, rng)
        s_a, s_b = entropy_cut_assignment_check(psi, basis6)
        assert abs(s_a - s_b) < 1e-10
    assert entropy_cut_assignment_check(vacuum_state(basis6), basis6) == (0.0, 0.0)


def test_entropy_bound(basis6, rng):
    # matter dimensions on each side plus one cut-flux bit
    for cut in range(5):
        n_left = cut + 1
        bound = math.log(min(2**n_left * 2, 2 ** (6 - n_left) * 2))
        for _ in range(5):
            psi = random_physical_state(basis6, rng)
            s = entropy_at_cut(psi, basis6, cut).entropy
            assert 0.0 <= s <= bound + 1e-12


def test_entropy_phase_and_scale_invariance(basis6, rng):
    psi = random_physical_state(basis6, rng)
    base = entropy_at_cut(psi, basis6).entropy
    rotated = psi.amplitudes * np.exp(1j * 0.7)
    assert entropy_at_cut(rotated, basis6).entropy == pytest.approx(base, abs=1e-13)
    nudged = psi.amplitudes * (1.0 + 1e-9)   # renormalized internally
    assert entropy_at_cut(nudged, basis6).entropy == pytest.approx(base, abs=1e-8)


def test_entropy_rejects_unnormalized(basis6):
    with pytest.raises(ValueError):
        entropy_at_cut(np.ones(basis6.dim, dtype=complex), basis6)


def test_entropy_spectrum_contract(basis6, rng):
    psi = random_physical_state(basis6, rng)
    res = entropy_at_cut(psi, basis6)
    lam = res.schmidt_spectrum
    assert np.all(np.diff(lam) <= 1e-15)          # descending
    assert lam.sum() == pytest.approx(1.0, abs=1e-12)
    kept = lam[lam > 1e-16]
    # entropy independent of summation order
    rng.shuffle(kept)
    assert res.entropy == pytest.approx(float(-(kept * np.log(kept)).sum()), abs=1e-13)


def test_bipartition_validation(basis6):
    with pytest.raises(ValueError):
        entropy_at_cut(vacuum_state(basis6), basis6, BipartitionSpec(5))
    with pytest.raises(ValueError):
        entropy_at_cut(vacuum_state(basis6), basis6, -1)


def test_local_expectations_vacuum(basis6):
    params = CouplingParams(x=0.5)
    h0 = build_h0(basis6, params)
    flux, occ, energy = local_expectations(vacuum_state(basis6), basis6, h0)
    assert np.allclose(flux, 0.0)
    assert np.allclose(occ, 0.0)
    assert energy == pytest.approx(-6 * params.mu - 5, abs=1e-12)


def test_local_expectations_pair_state(basis6):
    bits = vacuum_bits(6)
    bits[2] ^= 1
    bits[3] ^= 1
    amps = np.zeros(basis6.dim, dtype=complex)
    amps[basis6.index_of(bits)] = 1.0
    flux, occ, energy = local_expectations(amps, basis6)
    assert occ.tolist() == [0, 0, 1, 1, 0, 0]
    assert flux.tolist() == [0, 0, 1, 0, 0]
    assert energy is None


def test_flux_sum_equals_h1_expectation(basis6, rng):
    h1 = build_h1(basis6, MeasurementKind.ELECTRIC_FLUX)
    psi = random_physical_state(basis6, rng)
    flux, occ, _ = local_expectations(psi, basis6)
    assert flux.sum() == pytest.approx(h1.expectation(psi.amplitudes).real, abs=1e-12)
    assert np.all((flux >= 0) & (flux <= 1))
    assert np.all((occ >= 0) & (occ <= 1))


def test_time_average_constant():
    t = np.arange(11) * 0.1
    mean, std = time_average(t, np.full(11, 3.5), (0.0, 1.0))
    assert (mean, std) == (3.5, 0.0)


def test_time_average_linear_ramp():
    t = np.linspace(0.0, 1.0, 101)
    mean, std = time_average(t, t, (0.0, 1.0))
    assert mean == pytest.approx(0.5, abs=1e-12)


def test_time_average_default_window():
    t = np.arange(601) * 0.1
    values = np.where(t < 40.0, 99.0, 1.0)
    mean, _ = time_average(t, values)   # defaults to [T-20, T]
    assert mean == 1.0


def test_time_average_empty_window():
    with pytest.raises(ValueError):
        time_average([0.0, 1.0], [1.0, 2.0], (5.0, 6.0))
    with pytest.raises(ValueError):
        time_average([0.0, 1.0], [1.0, 2.0], (2.0, 1.0))


def test_saturation_classifier():
    assert is_saturated(1.0, 0.01)
    assert not is_saturated(1.0, 0.2)
    assert is_saturated(0.0, 0.0)       # flat zero counts as saturated
    assert not is_saturated(0.0, 0.5)


def test_initial_entropy_zero_along_quench(basis6):
    params = CouplingParams(x=0.5, gamma=0.0)
    h0 = build_h0(basis6, params)
    heff = build_heff(h0, build_h1(basis6, params.measurement), 0.0)
    recorder = TrajectoryRecorder(basis6, h0)
    state = vacuum_state(basis6)
    recorder.record_initial(state)
    evolve(state, heff, TimeGrid(dt=0.1, total_time=2.0), observers=(recorder,), basis=basis6)
    series = recorder.finish()
    assert series.entropy[0] == 0.0
    assert series.t[0] == 0.0
    assert len(series.t) == 21
    assert series.pre_norm[0] == 1.0
    assert np.all(series.gauss_violation < 1e-12)
    # expectation profiles stay physical
    assert np.all((series.flux >= -1e-12) & (series.flux <= 1 + 1e-12))
    assert np.all((series.occupation >= -1e-12) & (series.occupation <= 1 + 1e-12))
    # energy is conserved and real
    assert np.ptp(series.energy) < 1e-10
