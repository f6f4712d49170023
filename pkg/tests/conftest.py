import numpy as np
import pytest

from lsq.davies import DaviesModel, build_davies, flat_bath
from lsq.operators import PAULI_X, PAULI_Z


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def qubit_davies():
    """Thermal qubit: H = Z, transverse coupling, flat bath at beta = 1."""
    model = DaviesModel(
        hamiltonian=PAULI_Z,
        couplings=(PAULI_X,),
        bath=flat_bath(1.0),
    )
    return build_davies(model)
