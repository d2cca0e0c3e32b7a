"""Dense complex matrix helpers and the numerical oracles.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Everything in
the combinatorial layer moves entries around without arithmetic, so floats
only matter for the norm and rank computations collected here.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

NORM_TOL = 1e-9
RANK_TOL = 1e-8
MAX_POWER_ITERATIONS = 10_000


class NumericalError(RuntimeError):
    """Raised when an iterative oracle fails to converge or a rank is implausible."""


def as_cmatrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-d complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    """The ``n x n`` matrix with a single 1 at ``(i, j)``."""
    if n < 1:
        raise ValueError(f"dimension must be positive, got {n}")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"matrix unit ({i}, {j}) out of range for n={n}")
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def upper_units(n: int) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)`` with ``i <= j``: the matrix-unit basis of T_n."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def is_upper_triangular(a: np.ndarray) -> bool:
    return not np.any(np.tril(a, -1))


def block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    o = 0
    for b in blocks:
        r = b.shape[0]
        out[o:o + r, o:o + r] = b
        o += r
    return out


def _power_lambda(h: np.ndarray, x: np.ndarray, tol: float) -> float:
    # h is Hermitian positive semidefinite; returns its top eigenvalue.
    x = x / np.linalg.norm(x)
    lam = 0.0
    for _ in range(MAX_POWER_ITERATIONS):
        y = h @ x
        lam = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        if np.linalg.norm(y - lam * x) <= tol * max(lam, np.finfo(float).tiny):
            return lam
        x = y / ny
    raise NumericalError(
        f"power iteration did not converge in {MAX_POWER_ITERATIONS} steps"
    )


def operator_norm(a, tol: float = NORM_TOL) -> float:
    """Largest singular value of ``a`` by power iteration on ``a* a``.

    The iteration starts from the normalized all-ones vector.  Because that
    vector can be orthogonal to the top singular direction (``[[1, -1]]`` is
    the usual culprit), a second run from a fixed-seed vector is made and the
    larger estimate is kept.  Both runs are deterministic.
    """
    m = as_cmatrix(a)
    if m.size == 0:
        raise ValueError("operator_norm of an empty matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not np.any(m):
        return 0.0
    h = m.conj().T @ m
    n = h.shape[0]
    starts = [np.ones(n, dtype=complex)]
    rng = np.random.default_rng(0)
    starts.append(rng.standard_normal(n) + 1j * rng.standard_normal(n))
    lam = max(_power_lambda(h, x, tol) for x in starts)
    return float(np.sqrt(max(lam, 0.0)))


def _orthonormal_rows(vectors: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (as rows) for the row span of ``vectors``."""
    if vectors.shape[0] == 0:
        return vectors
    _, s, vh = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return vh[:0]
    keep = s > tol * s[0]
    return vh[keep]


def generated_star_algebra_dim(generators: Iterable, tol: float = RANK_TOL) -> int:
    """Dimension of the unital *-algebra generated by ``generators``.

    Repeats span(basis, products, adjoints) with a fresh orthonormal basis
    each round until the dimension stops growing.
    """
    gens = [as_cmatrix(g) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    n = gens[0].shape[0]
    for g in gens:
        if g.shape != (n, n):
            raise ValueError("generators must be square of equal size")
    vecs = [np.eye(n, dtype=complex).ravel()]
    vecs.extend(g.ravel() for g in gens)
    vecs.extend(g.conj().T.ravel() for g in gens)
    basis = _orthonormal_rows(np.array(vecs), tol)
    dim = basis.shape[0]
    while True:
        mats = basis.reshape(-1, n, n)
        prods = np.einsum("aij,bjk->abik", mats, mats).reshape(-1, n * n)
        adj = np.conj(np.transpose(mats, (0, 2, 1))).reshape(-1, n * n)
        basis = _orthonormal_rows(np.vstack([basis, adj, prods]), tol)
        new_dim = basis.shape[0]
        if new_dim > n * n:
            raise NumericalError(f"rank {new_dim} exceeds ambient dimension {n * n}")
        if new_dim == dim:
            return dim
        dim = new_dim


def span_contains(basis: Sequence, x, tol: float = RANK_TOL) -> bool:
    """Whether ``x`` lies (numerically) in the linear span of ``basis``."""
    target = as_cmatrix(x).ravel()
    if len(basis) == 0:
        return bool(np.linalg.norm(target) <= tol)
    cols = np.array([as_cmatrix(b).ravel() for b in basis]).T
    if cols.shape[0] != target.shape[0]:
        raise ValueError("basis and x are not conformable")
    coef, *_ = np.linalg.lstsq(cols, target, rcond=None)
    dist = np.linalg.norm(cols @ coef - target)
    return bool(dist < tol * (1.0 + np.linalg.norm(target)))
