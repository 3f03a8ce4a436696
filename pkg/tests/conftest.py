import numpy as np
import pytest

from larsaudit.ingest import Dataset, load_diabetes


def random_dataset(seed, n, m, signal=None, noise=1.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, m))
    beta = rng.standard_normal(m) if signal is None else np.asarray(signal, dtype=float)
    y = X @ beta + noise * rng.standard_normal(n)
    return Dataset(tuple(f"x{j}" for j in range(m)), X, y, f"random-{seed}")


@pytest.fixture(scope="session")
def diabetes():
    return load_diabetes()


@pytest.fixture
def make_dataset():
    return random_dataset
