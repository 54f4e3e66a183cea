import numpy as np
import pytest

from tensorconc import SparseTensor, TensorShape


def random_sparse(rng: np.random.Generator, k: int, n: int, density: float = 0.4,
                  values: str = "int") -> SparseTensor:
    """Random small tensor for oracle comparisons (dense-backed)."""
    shape = TensorShape(k, n)
    dense = np.zeros((n,) * k)
    mask = rng.random(dense.shape) < density
    if values == "int":
        dense[mask] = rng.integers(-4, 5, size=int(mask.sum()))
    elif values == "binary":
        dense[mask] = 1.0
    else:
        dense[mask] = rng.standard_normal(int(mask.sum()))
    return SparseTensor.from_dense(dense)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
