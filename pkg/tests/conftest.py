import math

import numpy as np
import pytest

from jcqed.core import PureQubit


def sample_states(count, seed=1234):
    """Haar-random pure qubits from normalised complex Gaussians."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return [PureQubit(c_g, c_e) for c_g, c_e in z]


@pytest.fixture
def states20():
    return sample_states(20)


@pytest.fixture
def basis_states():
    s = 1 / math.sqrt(2)
    return [PureQubit(1, 0), PureQubit(0, 1), PureQubit(s, s), PureQubit(s, 1j * s),
            PureQubit(0.6, 0.8j)]
