from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from complim.nest import (
    DigraphAlgebra,
    Interval,
    compress,
    compression_is_homomorphism,
    digraph_intervals,
    intervals_of,
    random_upper,
)


def test_interval_basics():
    q = Interval(4, 1, 3)
    assert q.rank == 2 and not q.is_identity and str(q) == "[1,3)"
    assert Interval(4, 0, 4).is_identity
    with pytest.raises(ValueError):
        Interval(3, 2, 4)


@pytest.mark.parametrize("n", range(1, 13))
def test_interval_count_and_rank_profile(n):
    qs = intervals_of(n)
    assert len(qs) == n * (n + 1) // 2
    assert qs == sorted(qs, key=lambda q: (q.start, q.end))
    ranks = Counter(q.rank for q in qs)
    assert all(ranks[n - j] == j + 1 for j in range(n))


def test_compress_slices():
    a = np.arange(16).reshape(4, 4)
    assert np.array_equal(compress(a, Interval(4, 1, 3)), a[1:3, 1:3])
    assert np.array_equal(compress(a, [0, 2]), a[np.ix_([0, 2], [0, 2])])
    with pytest.raises(ValueError):
        compress(a, Interval(3, 0, 1))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_interval_compressions_are_homomorphisms(n):
    for q in intervals_of(n):
        assert compression_is_homomorphism(n, q, trials=10)


def test_non_interval_breaks_multiplicativity():
    # {0, 2} skips 1: e_01 e_12 = e_02 survives, the factors do not
    assert not compression_is_homomorphism(3, [0, 2], trials=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 7), st.integers(0, 2 ** 31))
def test_random_upper_is_exactly_multiplicative_under_compression(n, seed):
    rng = np.random.default_rng(seed)
    a, b = random_upper(n, rng), random_upper(n, rng)
    assert not np.any(np.tril(a, -1))
    for q in intervals_of(n):
        assert np.array_equal(compress(a @ b, q), compress(a, q) @ compress(b, q))


def test_digraph_intervals_match_nest():
    for n in range(1, 6):
        alg = DigraphAlgebra.upper_triangular(n)
        assert digraph_intervals(alg) == [tuple(q.indices()) for q in intervals_of(n)]


def test_digraph_antichain_has_every_subset():
    assert len(digraph_intervals(DigraphAlgebra.antichain(3))) == 7


def test_digraph_validation():
    with pytest.raises(ValueError):
        DigraphAlgebra(2, np.zeros((2, 2)))
    rel = np.eye(3, dtype=bool)
    rel[0, 1] = rel[1, 2] = True
    with pytest.raises(ValueError):
        DigraphAlgebra(3, rel)
