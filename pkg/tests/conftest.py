import numpy as np
import pytest

from pseudocomp.rand_frames import complex_gaussian


@pytest.fixture
def gen():
    return np.random.default_rng(20240607)


def ginibre_like(gen, n, m=None):
    return complex_gaussian(gen, (n, m or n)) / np.sqrt(n)


def random_hermitian(gen, n):
    G = complex_gaussian(gen, (n, n))
    return (G + G.conj().T) / 2
