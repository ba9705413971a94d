import numpy as np
import pytest

from torusflux import FlatTorus
from torusflux.families import (
    hamiltonian_shear,
    standard_shear,
    translation_loop,
)

# Module tests run at a reduced desk size for speed; the acceptance suite
# re-runs the critical checks at the full production size.
N_TEST = 32
K_TEST = 100


@pytest.fixture(scope="session")
def torus():
    return FlatTorus(2, N_TEST, symplectic=True)


@pytest.fixture(scope="session")
def torus64():
    return FlatTorus(2, 64, symplectic=True)


@pytest.fixture(scope="session")
def shear(torus):
    return standard_shear(torus, K_TEST)


@pytest.fixture(scope="session")
def ham_shear(torus):
    return hamiltonian_shear(torus, K_TEST)


@pytest.fixture(scope="session")
def trans_loop(torus):
    return translation_loop(torus, K_TEST, (1, 0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
