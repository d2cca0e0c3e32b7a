import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from complim.matrix_core import (
    NumericalError,
    as_cmatrix,
    generated_star_algebra_dim,
    matrix_unit,
    operator_norm,
    span_contains,
    upper_units,
)
from complim import matrix_core


def small_matrices(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda n: st.lists(
            st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
            min_size=n * n,
            max_size=n * n,
        ).map(lambda xs: np.array(xs, dtype=complex).reshape(n, n))
    )


def test_matrix_unit_and_basis():
    e = matrix_unit(3, 0, 2)
    assert e[0, 2] == 1 and np.count_nonzero(e) == 1
    assert len(upper_units(4)) == 10
    with pytest.raises(IndexError):
        matrix_unit(2, 2, 0)


def test_as_cmatrix_rejects_bad_input():
    with pytest.raises(ValueError):
        as_cmatrix([1, 2, 3])
    with pytest.raises(ValueError):
        as_cmatrix([[np.nan]])


def test_operator_norm_known_values():
    assert operator_norm(np.diag([3, -5, 1])) == pytest.approx(5, abs=1e-8)
    assert operator_norm(np.array([[1, 1], [0, 1]])) == pytest.approx((1 + 5 ** 0.5) / 2, abs=1e-8)
    assert operator_norm(np.zeros((2, 2))) == 0.0
    # all-ones start is orthogonal to the top singular vector here
    assert operator_norm(np.array([[1, -1], [0, 0]])) == pytest.approx(2 ** 0.5, abs=1e-8)


def test_operator_norm_errors():
    with pytest.raises(ValueError):
        operator_norm(np.zeros((0, 0)))
    with pytest.raises(ValueError):
        operator_norm(np.eye(2), tol=0)


def test_operator_norm_reports_nonconvergence(monkeypatch):
    monkeypatch.setattr(matrix_core, "MAX_POWER_ITERATIONS", 1)
    with pytest.raises(NumericalError):
        operator_norm(np.array([[1.0, 2.0], [0.0, 1.1]]), tol=1e-15)


@settings(max_examples=40, deadline=None)
@given(small_matrices())
def test_operator_norm_matches_svd(a):
    ref = np.linalg.svd(a, compute_uv=False)[0]
    assert operator_norm(a) == pytest.approx(ref, rel=1e-6, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(small_matrices(), st.randoms(use_true_random=False))
def test_operator_norm_unitary_invariance(a, rnd):
    n = a.shape[0]
    perm = list(range(n))
    rnd.shuffle(perm)
    p = np.eye(n)[perm]
    assert operator_norm(p @ a @ p.T) == pytest.approx(operator_norm(a), rel=1e-6, abs=1e-8)
    assert operator_norm(2.5 * a) == pytest.approx(2.5 * operator_norm(a), rel=1e-6, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(small_matrices(5))
def test_operator_norm_dominates_entries(a):
    assert operator_norm(a) + 1e-8 >= np.max(np.abs(a))


def test_star_algebra_dims():
    n = 3
    units = [matrix_unit(n, i, j) for i, j in upper_units(n)]
    assert generated_star_algebra_dim(units) == 9
    assert generated_star_algebra_dim([np.diag([1, 2, 3])]) == 3
    assert generated_star_algebra_dim([np.eye(4)]) == 1
    with pytest.raises(ValueError):
        generated_star_algebra_dim([])


def test_span_contains():
    basis = [matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)]
    assert span_contains(basis, np.diag([2, -1]))
    assert not span_contains(basis, matrix_unit(2, 0, 1))
    assert span_contains([], np.zeros((2, 2)))
