"""Sparse operators over the gauge-reduced basis.

The coherent part couples configurations that differ by one nearest-neighbor
matter swap; the link flip that gauge invariance demands is implicit, because
the target configuration's derived links differ from the source's at exactly
that bond.  Mass and electric terms, and both measurement generators, are
diagonal in the configuration basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .model import CouplingParams, MeasurementKind
from .basis import PhysicalBasis

__all__ = ["SparseOperator", "build_h0", "build_h1", "build_heff", "dump_entries"]

HERMITIAN = "hermitian"
ANTI_HERMITIAN = "anti-hermitian"
GENERAL = "general"


@dataclass
class SparseOperator:
    """Complex sparse matrix plus a symmetry tag.

    ``matrix`` is CSR for fast matvec; ``entries()`` exposes the
    deduplicated, sorted coordinate form.  Immutable by convention once
    built; matvec is pure and reentrant.
    """

    matrix: sp.csr_matrix
    hermitian_flag: str = GENERAL

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def expectation(self, vec: np.ndarray) -> complex:
        return complex(np.vdot(vec, self.matrix @ vec))

    def entries(self):
        """(rows, cols, values) sorted by (row, col), duplicates summed."""
        coo = self.matrix.tocoo()
        coo.sum_duplicates()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


def build_h0(basis: PhysicalBasis, params: CouplingParams) -> SparseOperator:
    """Coherent Hamiltonian: x-hopping plus staggered mass plus electric term.

    Hopping acts on each bond whose matter bits differ, swapping them with
    amplitude x; the diagonal reads the mass and electric energies off the
    stored bits.
    """
    L = basis.L
    dim = basis.dim
    mu = params.mu
    z_matter = 2.0 * basis.matter_bits - 1.0
    z_link = 2.0 * basis.link_bits - 1.0
    stagger = (-1.0) ** np.arange(L)
    diag = mu * (z_matter @ stagger) + z_link.sum(axis=1)

    rows = [np.arange(dim)]
    cols = [np.arange(dim)]
    vals = [diag.astype(complex)]
    all_rows = np.arange(dim)
    for i in range(L - 1):
        mask = basis.matter_bits[:, i] != basis.matter_bits[:, i + 1]
        flip = (1 << (L - 1 - i)) | (1 << (L - 2 - i))
        targets = basis.codes[mask] ^ flip
        col = np.searchsorted(basis.codes, targets)
        rows.append(all_rows[mask])
        cols.append(col)
        vals.append(np.full(int(mask.sum()), params.x, dtype=complex))
    matrix = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    matrix.sum_duplicates()
    return SparseOperator(matrix, HERMITIAN)


def build_h1(basis: PhysicalBasis, kind: MeasurementKind) -> SparseOperator:
    """Measurement generator: a diagonal excitation counter.

    ELECTRIC_FLUX counts flux-carrying links, PARTICLE_DENSITY counts
    particles plus antiparticles.  Both annihilate the vacuum, so the
    no-click weight is largest there; a constant shift would only rescale
    the global norm, which renormalization removes.
    """
    if kind == MeasurementKind.ELECTRIC_FLUX:
        counts = basis.link_bits.sum(axis=1).astype(float)
    elif kind == MeasurementKind.PARTICLE_DENSITY:
        counts = basis.excitation_table.sum(axis=1).astype(float)
    else:
        raise ValueError(f"unknown measurement kind {kind!r}")
    matrix = sp.diags(counts, format="csr", dtype=complex)
    return SparseOperator(matrix, HERMITIAN)


def build_heff(h0: SparseOperator, h1: SparseOperator, gamma: float) -> SparseOperator:
    """Non-Hermitian generator h0 - i*gamma*h1 of the no-click evolution."""
    if h0.dim != h1.dim:
        raise ValueError(f"operator dimensions differ: {h0.dim} vs {h1.dim}")
    if h0.hermitian_flag != HERMITIAN or h1.hermitian_flag != HERMITIAN:
        raise ValueError("build_heff expects Hermitian h0 and h1")
    if gamma == 0:
        return SparseOperator(h0.matrix.copy(), HERMITIAN)
    matrix = (h0.matrix - 1j * gamma * h1.matrix).tocsr()
    return SparseOperator(matrix, GENERAL)


def dump_entries(op: SparseOperator, path) -> None:
    """Write the coordinate entries as 'row col real imag' lines."""
    rows, cols, vals = op.entries()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dim {op.dim} flag {op.hermitian_flag}\n")
        for r, c, v in zip(rows, cols, vals):
            fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
