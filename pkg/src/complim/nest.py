"""Intervals of the standard nest, compressions, and digraph algebras."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence, Union

import numpy as np

from .matrix_core import as_cmatrix, matrix_unit, upper_units


@dataclass(frozen=True, order=True)
class Interval:
    """The semi-invariant projection onto basis vectors ``start .. end-1`` of C^ambient."""

    ambient: int
    start: int
    end: int

    def __post_init__(self):
        if not (0 <= self.start <= self.end <= self.ambient):
            raise ValueError(
                f"invalid interval [{self.start},{self.end}) in dimension {self.ambient}"
            )

    @property
    def rank(self) -> int:
        return self.end - self.start

    @property
    def is_identity(self) -> bool:
        return self.start == 0 and self.end == self.ambient

    def indices(self) -> range:
        return range(self.start, self.end)

    def __str__(self) -> str:
        return f"[{self.start},{self.end})"


def intervals_of(n: int) -> list[Interval]:
    """All nonzero intervals of T_n, ordered lexicographically by ``(start, end)``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return [Interval(n, s, e) for s in range(n) for e in range(s + 1, n + 1)]


def _index_list(q) -> list[int]:
    if isinstance(q, Interval):
        return list(q.indices())
    return sorted(int(i) for i in q)


def compress(a, q: Union[Interval, Iterable[int]]) -> np.ndarray:
    """Restrict ``a`` to the rows and columns selected by ``q``.

    ``q`` is normally an :class:`Interval`; an arbitrary index set is also
    accepted so that non-intervals can be shown to break multiplicativity.
    """
    m = as_cmatrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError("compress expects a square matrix")
    if isinstance(q, Interval):
        if q.ambient != m.shape[0]:
            raise ValueError(
                f"interval lives in dimension {q.ambient}, matrix is {m.shape[0]}"
            )
        return m[q.start:q.end, q.start:q.end].copy()
    idx = _index_list(q)
    if any(i < 0 or i >= m.shape[0] for i in idx):
        raise ValueError("index set out of range")
    return m[np.ix_(idx, idx)].copy()


def random_upper(n: int, rng: np.random.Generator, scale: int = 5) -> np.ndarray:
    """Random upper-triangular matrix with Gaussian-integer entries.

    Integer entries keep every product exact in double precision, so
    homomorphism identities can be compared with ``==``.
    """
    re = rng.integers(-scale, scale + 1, size=(n, n))
    im = rng.integers(-scale, scale + 1, size=(n, n))
    return np.triu(re + 1j * im).astype(complex)


def compression_is_homomorphism(
    n: int, q: Union[Interval, Iterable[int]], trials: int = 50, seed: int = 0
) -> bool:
    """Check ``compress(ab) == compress(a) compress(b)`` exactly on T_n.

    Tests every pair of matrix units plus ``trials`` random pairs.
    """
    if isinstance(q, Interval) and q.ambient != n:
        raise ValueError("interval ambient dimension does not match n")
    units = [matrix_unit(n, i, j) for i, j in upper_units(n)]
    for a in units:
        for b in units:
            if not np.array_equal(compress(a @ b, q), compress(a, q) @ compress(b, q)):
                return False
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        a, b = random_upper(n, rng), random_upper(n, rng)
        if not np.array_equal(compress(a @ b, q), compress(a, q) @ compress(b, q)):
            return False
    return True


@dataclass(frozen=True)
class DigraphAlgebra:
    """Subalgebra of M_n spanned by the matrix units ``e_ij`` with ``relation[i, j]``."""

    n: int
    relation: np.ndarray

    def __post_init__(self):
        rel = np.asarray(self.relation, dtype=bool)
        if rel.shape != (self.n, self.n):
            raise ValueError(f"relation must be {self.n}x{self.n}")
        if not np.all(np.diag(rel)):
            raise ValueError("relation must be reflexive")
        closure = (rel.astype(int) @ rel.astype(int)) > 0
        if np.any(closure & ~rel):
            raise ValueError("relation must be transitive")
        rel = rel.copy()
        rel.setflags(write=False)
        object.__setattr__(self, "relation", rel)

    @classmethod
    def upper_triangular(cls, n: int) -> "DigraphAlgebra":
        return cls(n, np.triu(np.ones((n, n), dtype=bool)))

    @classmethod
    def antichain(cls, n: int) -> "DigraphAlgebra":
        return cls(n, np.eye(n, dtype=bool))

    def is_invariant(self, subset: Sequence[int]) -> bool:
        """``p^perp A p = 0`` for the diagonal projection onto ``subset``."""
        inside = np.zeros(self.n, dtype=bool)
        inside[list(subset)] = True
        return not np.any(self.relation[np.ix_(~inside, inside)])


def digraph_intervals(alg: DigraphAlgebra) -> list[tuple[int, ...]]:
    """Nonzero diagonal projections ``f - e`` with ``e <= f`` invariant.

    Projections are returned as sorted index tuples, in lexicographic order;
    for the upper-triangular relation this reproduces :func:`intervals_of`.
    """
    n = alg.n
    invariant = [
        frozenset(s)
        for r in range(n + 1)
        for s in combinations(range(n), r)
        if alg.is_invariant(s)
    ]
    found = set()
    for e in invariant:
        for f in invariant:
            if e < f:
                found.add(tuple(sorted(f - e)))
    return sorted(found)


def diagonal_projection(n: int, subset: Iterable[int]) -> np.ndarray:
    p = np.zeros((n, n), dtype=complex)
    for i in subset:
        p[i, i] = 1.0
    return p
