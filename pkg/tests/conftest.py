import numpy as np
import pytest
from scipy.stats import unitary_group


def haar_unitary(m, seed):
    return unitary_group.rvs(m, random_state=seed)


def random_complex(n, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


def random_subunitary(m, seed, smin=0.4, smax=0.95):
    rng = np.random.default_rng(seed)
    u = unitary_group.rvs(m, random_state=seed)
    v = unitary_group.rvs(m, random_state=seed + 10_000)
    s = rng.uniform(smin, smax, m)
    return u @ np.diag(s) @ v


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
