"""Exact no-click evolution of a Z2 gauge chain with staggered matter.

The package solves the local gauge constraint exactly, evolves state vectors
over the reduced 2^(L-1)-dimensional sector under the non-Hermitian
no-click generator, and records entanglement entropy and local observables
along the way.  See the README for the CLI and file formats.
"""

from .model import (
    ConfigError,
    CouplingParams,
    LatticeSpec,
    MeasurementKind,
    TimeGrid,
    derive_mu,
    vacuum_bits,
)
from .basis import (
    PhysicalBasis,
    derive_links,
    dump_basis,
    embed_full,
    enumerate_basis,
    gauss_check,
)
from .hamiltonian import SparseOperator, build_h0, build_h1, build_heff
from .propagator import (
    GaussLawViolationError,
    PropagatorError,
    StateVector,
    StepDiagnostics,
    dense_step,
    evolve,
    krylov_step,
    random_physical_state,
    vacuum_state,
)
from .observables import (
    BipartitionSpec,
    EntropyResult,
    TimeSeries,
    TrajectoryRecorder,
    default_cut,
    entropy_at_cut,
    entropy_cut_assignment_check,
    is_saturated,
    local_expectations,
    time_average,
)
from .experiment import (
    FIT_MODELS,
    FitResult,
    RunConfig,
    SweepResult,
    fit_saturation,
    run_single,
    run_sweep,
    run_trajectory,
    verify,
)

__version__ = "0.1.0"
