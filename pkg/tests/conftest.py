import random

import pytest
from hypothesis import strategies as st

from fkrange.zlattice import IntMatrix


def int_matrices(max_rows=4, max_cols=4, lo=-9, hi=9):
    return st.integers(0, max_rows).flatmap(
        lambda r: st.integers(0, max_cols).flatmap(
            lambda c: st.lists(st.lists(st.integers(lo, hi), min_size=c, max_size=c),
                               min_size=r, max_size=r).map(lambda rows: IntMatrix.of(rows, cols=c))))


def random_matrix(rng: random.Random, r: int, c: int, lo: int, hi: int) -> IntMatrix:
    return IntMatrix.of([[rng.randint(lo, hi) for _ in range(c)] for _ in range(r)], cols=c)


@pytest.fixture
def rng():
    return random.Random(12345)
