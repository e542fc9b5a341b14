"""Couplings, lattice geometry, time grid, and spin-encoding conventions.

The model lives on an open chain of ``L`` matter sites joined by ``L - 1``
interior gauge links, with one frozen flux stub on each end of the chain.
Matter occupation and link flux are both two-state and stored as bits; the
mapping between bits, Pauli eigenvalues, and physical labels is fixed here
once and shared by every other module.

Encoding
--------
* matter bit 1  <->  sigma^Z = +1  (fermion present on an odd site, or
  antifermion absent on an even site)
* matter bit 0  <->  sigma^Z = -1
* link bit 0    <->  tau^Z = -1  (no flux, label s = -1/2)
* link bit 1    <->  tau^Z = +1  (flux present, label s = +1/2)

The strong-coupling vacuum is the half-filled staggered pattern: bit 1 on
every odd site, bit 0 on every even site, every link flux-free.  It is the
ground state of the electric-plus-mass part of the Hamiltonian and the
initial state of every quench.

The link-bit sign choice (bit 0 meaning ``tau^Z = -1``) makes the electric
term ``sum tau^Z`` assign the lowest energy to the flux-free vacuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ConfigError",
    "MeasurementKind",
    "CouplingParams",
    "LatticeSpec",
    "TimeGrid",
    "derive_mu",
    "vacuum_bits",
    "sigma_z_values",
    "bits_from_sigma_z",
    "flux_labels",
    "link_bits_from_flux_labels",
    "excitations",
]

# Boundary fluxes are frozen at s = -1/2 (link bit 0, tau^Z = -1): the
# single global charge sector with zero net incoming flux.
BOUNDARY_FLUX_BIT = 0
BOUNDARY_FLUX_LABEL = -0.5


class ConfigError(ValueError):
    """Invalid parameter set or run configuration."""


class MeasurementKind(Enum):
    """Which local observable the continuous monitoring couples to."""

    ELECTRIC_FLUX = "flux"
    PARTICLE_DENSITY = "density"

    @classmethod
    def from_name(cls, name: str) -> "MeasurementKind":
        for kind in cls:
            if kind.value == name:
                return kind
        raise ConfigError(f"unknown measurement kind {name!r}; use 'flux' or 'density'")


def derive_mu(x: float, m_over_g: float = 1.0) -> float:
    """Dimensionless staggered mass ``2 * (m/g) * sqrt(x)``.

    Strictly increasing in ``x`` for fixed mass ratio.  ``x = 0`` is the
    frozen strong-coupling point (no hopping, zero mass); negative x is
    rejected.
    """
    if x < 0:
        raise ConfigError(f"coupling x must be nonnegative, got {x}")
    return 2.0 * m_over_g * math.sqrt(x)


@dataclass(frozen=True)
class CouplingParams:
    """Dimensionless couplings of a single run.

    ``mu`` is always recomputed from ``x`` and ``m_over_g``; it is never
    stored independently.
    """

    x: float
    gamma: float = 0.0
    m_over_g: float = 1.0
    measurement: MeasurementKind = MeasurementKind.ELECTRIC_FLUX

    def __post_init__(self):
        if self.x < 0:
            raise ConfigError(f"coupling x must be nonnegative, got {self.x}")
        if self.gamma < 0:
            raise ConfigError(f"measurement rate gamma must be >= 0, got {self.gamma}")
        if not isinstance(self.measurement, MeasurementKind):
            object.__setattr__(
                self, "measurement", MeasurementKind.from_name(str(self.measurement))
            )

    @property
    def mu(self) -> float:
        return derive_mu(self.x, self.m_over_g)


@dataclass(frozen=True)
class LatticeSpec:
    """Open chain of ``L`` matter sites and ``L - 1`` interior links.

    ``L`` must be even (equal sublattice sizes) and at least 4.  The two
    boundary fluxes are constants of the run; only the zero-incoming-flux
    sector (both bits 0) is supported.
    """

    L: int
    left_flux_bit: int = BOUNDARY_FLUX_BIT
    right_flux_bit: int = BOUNDARY_FLUX_BIT

    def __post_init__(self):
        if self.L < 4 or self.L % 2 != 0:
            raise ConfigError(f"lattice size L must be even and >= 4, got {self.L}")
        if self.left_flux_bit != BOUNDARY_FLUX_BIT or self.right_flux_bit != BOUNDARY_FLUX_BIT:
            raise ConfigError(
                "only the zero-boundary-flux charge sector is supported "
                "(left_flux_bit == right_flux_bit == 0)"
            )

    @property
    def n_links(self) -> int:
        return self.L - 1


@dataclass(frozen=True)
class TimeGrid:
    """Uniform step grid: ``n_steps = round(T / dt)`` steps of size ``dt``."""

    dt: float = 0.1
    total_time: float = 60.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError(f"time step dt must be positive, got {self.dt}")
        if self.total_time <= 0:
            raise ConfigError(f"total time must be positive, got {self.total_time}")
        n = round(self.total_time / self.dt)
        if n < 1 or abs(n * self.dt - self.total_time) > 1e-9 * max(1.0, self.total_time):
            raise ConfigError(
                f"total time {self.total_time} is not an integer number of steps dt={self.dt}"
            )

    @property
    def n_steps(self) -> int:
        return round(self.total_time / self.dt)

    def times(self) -> np.ndarray:
        """Grid times 0, dt, ..., n_steps*dt (length n_steps + 1)."""
        return np.arange(self.n_steps + 1) * self.dt


def vacuum_bits(L: int) -> np.ndarray:
    """Matter bits of the strong-coupling vacuum: 0 on even, 1 on odd sites."""
    return (np.arange(L) % 2).astype(np.uint8)


def sigma_z_values(bits) -> np.ndarray:
    """Map matter/link bits to Pauli-Z eigenvalues 2*bit - 1."""
    return 2 * np.asarray(bits, dtype=np.int8) - 1


def bits_from_sigma_z(values) -> np.ndarray:
    """Inverse of :func:`sigma_z_values`."""
    values = np.asarray(values)
    if not np.all(np.abs(values) == 1):
        raise ValueError("Pauli-Z eigenvalues must be +1 or -1")
    return ((values + 1) // 2).astype(np.uint8)


def flux_labels(link_bits) -> np.ndarray:
    """Map link bits to half-integer flux labels s = bit - 1/2."""
    return np.asarray(link_bits, dtype=float) - 0.5


def link_bits_from_flux_labels(labels) -> np.ndarray:
    """Inverse of :func:`flux_labels`."""
    labels = np.asarray(labels, dtype=float)
    if not np.all(np.abs(labels) == 0.5):
        raise ValueError("flux labels must be +1/2 or -1/2")
    return (labels + 0.5).astype(np.uint8)


def excitations(bits) -> np.ndarray:
    """Per-site particle/antiparticle indicator: 1 where the matter bit
    deviates from the vacuum pattern, 0 elsewhere.

    Works on a single length-L bit vector or a (n, L) batch.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    L = bits.shape[-1]
    return bits ^ vacuum_bits(L)
