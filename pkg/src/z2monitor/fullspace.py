"""Full tensor-product oracles for cross-checking the reduced machinery.

Everything here works in the unconstrained 2^(2L-1)-dimensional space of all
matter and link spins, built independently of the gauge-reduced basis, so it
can serve as a brute-force reference: the Hamiltonian assembled from Pauli
factors, the gauge generators as explicit operators, and the entanglement
entropy from an explicit reduced density matrix.  Only small systems
(L <= 8) are meant to pass through here.

Factor layout matches :attr:`PhysicalBasis.full_indices`: sites and links
interleave as [site 0, link (0,1), site 1, ..., site L-1], factor 0 most
significant, local ket index equal to the bit value (so Z = diag(-1, +1)).
"""

from __future__ import annotations

import os

import numpy as np
import scipy.sparse as sp

from .model import LatticeSpec, CouplingParams
from .basis import PhysicalBasis, embed_full

__all__ = [
    "full_operator",
    "build_full_h0",
    "build_gauss_operators",
    "gauss_check_full",
    "projector",
    "entropy_full",
]

# Local two-state matrices with ket index == bit value.
_Z = sp.csr_matrix(np.diag([-1.0, 1.0]))
_X = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_RAISE = sp.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))   # bit 0 -> bit 1
_LOWER = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))

# Deliberate-breakage hook for the self-check suite: setting this variable
# to "flip-mass-staggering" builds the full-space Hamiltonian with the wrong
# sublattice sign, which the projection-equality check must catch.
MUTATION_ENV = "Z2MONITOR_VERIFY_MUTATION"


def site_factor(i: int) -> int:
    return 2 * i


def link_factor(i: int) -> int:
    return 2 * i + 1


def full_operator(L: int, factors: dict) -> sp.csr_matrix:
    """Kronecker product over all 2L-1 factors, identity where unspecified."""
    out = sp.identity(1, format="csr", dtype=complex)
    for k in range(2 * L - 1):
        out = sp.kron(out, factors.get(k, sp.identity(2, format="csr")), format="csr")
    return out


def build_full_h0(lattice: LatticeSpec, params: CouplingParams) -> sp.csr_matrix:
    """Hopping + staggered mass + electric field over the full space."""
    L = lattice.L
    x, mu = params.x, params.mu
    stagger_flip = os.environ.get(MUTATION_ENV) == "flip-mass-staggering"
    dim = 1 << (2 * L - 1)
    h = sp.csr_matrix((dim, dim), dtype=complex)
    for i in range(L - 1):
        hop = full_operator(L, {site_factor(i): _RAISE, link_factor(i): _X, site_factor(i + 1): _LOWER})
        h = h + x * (hop + hop.conjugate().transpose())
    for i in range(L):
        sign = (-1.0) ** (i + 1) if stagger_flip else (-1.0) ** i
        h = h + mu * sign * full_operator(L, {site_factor(i): _Z})
    for i in range(L - 1):
        h = h + full_operator(L, {link_factor(i): _Z})
    return h


def build_gauss_operators(lattice: LatticeSpec) -> list:
    """Gauge generators G_i as sparse operators, boundary fluxes frozen in."""
    L = lattice.L
    left_z = 2.0 * lattice.left_flux_bit - 1.0
    right_z = 2.0 * lattice.right_flux_bit - 1.0
    ops = []
    for i in range(L):
        factors = {site_factor(i): _Z}
        scale = -1.0 if i % 2 == 0 else 1.0   # (-1)^(n_i - offset_i) = -/+ sigma^Z
        if i == 0:
            scale *= left_z
        else:
            factors[link_factor(i - 1)] = _Z
        if i == L - 1:
            scale *= right_z
        else:
            factors[link_factor(i)] = _Z
        ops.append(scale * full_operator(L, factors))
    return ops


def gauss_check_full(full_state: np.ndarray, lattice: LatticeSpec) -> float:
    """max_i ||(G_i - 1) psi|| for an arbitrary full-space vector."""
    full_state = np.asarray(full_state)
    worst = 0.0
    for g in build_gauss_operators(lattice):
        worst = max(worst, float(np.linalg.norm(g @ full_state - full_state)))
    return worst


def projector(basis: PhysicalBasis) -> sp.csr_matrix:
    """Isometry from the reduced basis into the full space (one-hot columns)."""
    dim_full = 1 << (2 * basis.L - 1)
    data = np.ones(basis.dim)
    return sp.csr_matrix(
        (data, (basis.full_indices, np.arange(basis.dim))), shape=(dim_full, basis.dim)
    )


def entropy_full(state, basis: PhysicalBasis, cut_bond: int, link_in_a: bool = False) -> float:
    """Half-chain entropy from the full-space reduced density matrix.

    The state is embedded, reshaped across the cut, and the smaller-side
    density matrix is diagonalized; deliberately avoids the blocked SVD path
    it is used to validate.  ``link_in_a`` chooses which side receives the
    cut link.
    """
    L = basis.L
    if not 0 <= cut_bond <= L - 2:
        raise ValueError(f"cut bond must be in 0..{L - 2}, got {cut_bond}")
    full = embed_full(state, basis)
    n_a_factors = 2 * cut_bond + 2 if link_in_a else 2 * cut_bond + 1
    m = full.reshape(1 << n_a_factors, -1)
    if m.shape[0] <= m.shape[1]:
        rho = m @ m.conj().T
    else:
        rho = m.conj().T @ m
    evals = np.linalg.eigvalsh(rho)
    evals = evals[evals > 1e-16]
    return max(0.0, float(-(evals * np.log(evals)).sum()))
