import numpy as np
import pytest

from z2monitor import CouplingParams, LatticeSpec, enumerate_basis


@pytest.fixture(scope="session")
def lattice4():
    return LatticeSpec(4)


@pytest.fixture(scope="session")
def lattice6():
    return LatticeSpec(6)


@pytest.fixture(scope="session")
def basis4(lattice4):
    return enumerate_basis(lattice4)


@pytest.fixture(scope="session")
def basis6(lattice6):
    return enumerate_basis(lattice6)


@pytest.fixture(scope="session")
def basis8():
    return enumerate_basis(LatticeSpec(8))


@pytest.fixture
def params_half():
    return CouplingParams(x=0.5, gamma=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
