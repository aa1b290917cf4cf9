import random

import pytest
from hypothesis import strategies as st

from catclust.core import CategoricalMatrix


def cols_from(*groups):
    """cols_from(((0, 0), 3), ((1, 1), 1)) -> three (0,0) columns then one (1,1)."""
    out = []
    for col, times in groups:
        out.extend([tuple(col)] * times)
    return out


def random_columns(rng: random.Random, n, m, sigma, repeat=0.6):
    """Columns drawn from a small pool so identical columns are common."""
    pool = [tuple(rng.randrange(sigma) for _ in range(m)) for _ in range(rng.randint(1, n))]
    return [rng.choice(pool) if rng.random() < repeat else tuple(rng.randrange(sigma) for _ in range(m))
            for _ in range(n)]


@st.composite
def matrices(draw, max_n=7, max_m=3, max_sigma=3):
    m = draw(st.integers(1, max_m))
    sigma = draw(st.integers(2, max_sigma))
    n = draw(st.integers(1, max_n))
    pool = draw(st.lists(st.tuples(*[st.integers(0, sigma - 1)] * m), min_size=1, max_size=4))
    cols = draw(st.lists(st.sampled_from(pool), min_size=n, max_size=n))
    return CategoricalMatrix(cols, sigma)


@pytest.fixture
def rng():
    return random.Random(20240611)
