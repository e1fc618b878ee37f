import numpy as np
import pytest

from toricdyn import build_lattice


@pytest.fixture(scope="session")
def lat22():
    return build_lattice(2, 2)


@pytest.fixture(scope="session")
def lat23():
    return build_lattice(2, 3)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_loop_state(rng, dim):
    a = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return a / np.linalg.norm(a)
