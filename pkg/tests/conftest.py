import numpy as np
import pytest

from hofa.core import BoxSpec, GridFunction, SetIndicator
from hofa.rng import make_rng


@pytest.fixture
def rng():
    return make_rng(20260810)


def random_grid(rng, dims, kind="complex", bounded=True):
    if kind == "complex":
        vals = rng.random(dims) * np.exp(2j * np.pi * rng.random(dims))
    elif kind == "signs":
        vals = rng.choice([-1.0, 1.0], dims).astype(complex)
    elif kind == "unit":
        vals = rng.random(dims).astype(complex)
    else:
        vals = (rng.random(dims) < rng.random()).astype(complex)
    return GridFunction(BoxSpec(dims), vals, bounded=bounded)


def random_set(rng, dims, p=None):
    p = rng.random() if p is None else p
    return SetIndicator(BoxSpec(dims), rng.random(dims) < p)
