"""Compression embeddings T_n -> T_m and their exact calculus.

An embedding is stored in normal form: the ordered list of intervals of T_n
whose compressions fill the diagonal of T_m from top-left to bottom-right,
together with the index of one identity block (the distinguished summand).
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .matrix_core import (
    as_cmatrix,
    is_upper_triangular,
    matrix_unit,
    operator_norm,
    upper_units,
)
from .nest import Interval, compress, random_upper


class EmbeddingError(ValueError):
    """An embedding violates the compression-embedding invariants."""


@dataclass(frozen=True)
class CompressionEmbedding:
    source_dim: int
    blocks: tuple[Interval, ...]
    distinguished: int = 0

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @classmethod
    def from_pairs(
        cls, n: int, pairs: Sequence[Sequence[int]], distinguished: int = 0
    ) -> "CompressionEmbedding":
        """Build from ``[(s, e), ...]`` half-open index pairs over T_n."""
        return cls(n, tuple(Interval(n, int(s), int(e)) for s, e in pairs), distinguished)

    @classmethod
    def identity(cls, n: int) -> "CompressionEmbedding":
        return cls(n, (Interval(n, 0, n),), 0)

    @classmethod
    def standard(cls, n: int, multiplicity: int) -> "CompressionEmbedding":
        return cls(n, (Interval(n, 0, n),) * multiplicity, 0)

    @cached_property
    def target_dim(self) -> int:
        return sum(b.rank for b in self.blocks)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Starting diagonal position of each block inside T_target."""
        out, o = [], 0
        for b in self.blocks:
            out.append(o)
            o += b.rank
        return tuple(out)

    @property
    def distinguished_interval(self) -> Interval:
        """Support of the distinguished identity summand, as an interval of T_target."""
        o = self.offsets[self.distinguished]
        return Interval(self.target_dim, o, o + self.source_dim)

    def pairs(self) -> list[tuple[int, int]]:
        return [(b.start, b.end) for b in self.blocks]

    def identity_count(self) -> int:
        return sum(1 for b in self.blocks if b.is_identity)

    def __str__(self) -> str:
        body = " + ".join(
            ("*" if i == self.distinguished else "") + str(b) for i, b in enumerate(self.blocks)
        )
        return f"T_{self.source_dim} -> T_{self.target_dim}: {body}"


def validate_embedding(emb: CompressionEmbedding) -> int:
    """Check the invariants and return the target dimension."""
    n = emb.source_dim
    if n < 1:
        raise EmbeddingError(f"source dimension must be positive, got {n}")
    if not emb.blocks:
        raise EmbeddingError("embedding has no blocks")
    for i, b in enumerate(emb.blocks):
        if b.ambient != n:
            raise EmbeddingError(f"block {i} {b} lives in T_{b.ambient}, expected T_{n}")
        if b.rank < 1:
            raise EmbeddingError(f"block {i} {b} has rank 0")
    if not any(b.is_identity for b in emb.blocks):
        raise EmbeddingError("no block is the identity compression")
    if not (0 <= emb.distinguished < len(emb.blocks)):
        raise EmbeddingError(f"distinguished index {emb.distinguished} out of range")
    if not emb.blocks[emb.distinguished].is_identity:
        raise EmbeddingError(
            f"distinguished block {emb.distinguished} {emb.blocks[emb.distinguished]} "
            "is not the identity interval"
        )
    return emb.target_dim


def apply_embedding(emb: CompressionEmbedding, a) -> np.ndarray:
    """Block-diagonal image of ``a``; every entry is copied, never computed."""
    m = as_cmatrix(a)
    if m.shape != (emb.source_dim, emb.source_dim):
        raise ValueError(f"expected a {emb.source_dim}x{emb.source_dim} matrix, got {m.shape}")
    if not is_upper_triangular(m):
        raise ValueError("input is not upper triangular")
    out = np.zeros((emb.target_dim, emb.target_dim), dtype=complex)
    for o, b in zip(emb.offsets, emb.blocks):
        r = b.rank
        out[o:o + r, o:o + r] = m[b.start:b.end, b.start:b.end]
    return out


def compose_single(q: Interval, emb: CompressionEmbedding) -> list[Interval]:
    """Intervals of the source whose compressions sum to ``compress(emb(.), q)``."""
    if q.ambient != emb.target_dim:
        raise ValueError(f"interval lives in T_{q.ambient}, embedding targets T_{emb.target_dim}")
    offsets = emb.offsets
    out = []
    i = max(bisect_right(offsets, q.start) - 1, 0)
    while i < len(offsets) and offsets[i] < q.end:
        b, o = emb.blocks[i], offsets[i]
        u, v = max(q.start - o, 0), min(q.end - o, b.rank)
        if u < v:
            out.append(Interval(emb.source_dim, b.start + u, b.start + v))
        i += 1
    return out


def compose(later: CompressionEmbedding, earlier: CompressionEmbedding) -> CompressionEmbedding:
    """Normal form of ``later o earlier``."""
    if earlier.target_dim != later.source_dim:
        raise ValueError(
            f"cannot compose: earlier targets T_{earlier.target_dim}, "
            f"later starts at T_{later.source_dim}"
        )
    blocks: list[Interval] = []
    dist = -1
    for idx, q in enumerate(later.blocks):
        if idx == later.distinguished:
            # later's distinguished block is the identity, so it reproduces all of earlier
            dist = len(blocks) + earlier.distinguished
        blocks.extend(compose_single(q, earlier))
    return CompressionEmbedding(earlier.source_dim, tuple(blocks), dist)


def compose_chain(steps: Sequence[CompressionEmbedding]) -> CompressionEmbedding:
    """Compose ``steps[0]`` first, then ``steps[1]``, and so on."""
    if not steps:
        raise ValueError("empty chain")
    out = steps[0]
    for s in steps[1:]:
        out = compose(s, out)
    return out


def left_inverse_check(emb: CompressionEmbedding, trials: int = 20, seed: int = 0) -> bool:
    """Compressing to the distinguished support undoes the embedding."""
    validate_embedding(emb)
    q = emb.distinguished_interval
    n = emb.source_dim
    inputs = [matrix_unit(n, i, j) for i, j in upper_units(n)]
    rng = np.random.default_rng(seed)
    inputs += [random_upper(n, rng) for _ in range(trials)]
    return all(np.array_equal(compress(apply_embedding(emb, a), q), a) for a in inputs)


def is_regular(emb: CompressionEmbedding) -> bool:
    """Every matrix unit goes to a 0-1 matrix, i.e. a sum of matrix units."""
    n = emb.source_dim
    for i, j in upper_units(n):
        img = apply_embedding(emb, matrix_unit(n, i, j))
        if not np.all((img == 0) | (img == 1)) or not np.any(img):
            return False
    return True


def amplify(emb: CompressionEmbedding, big) -> np.ndarray:
    """Apply ``emb`` blockwise to a ``t x t`` block matrix with T_n blocks."""
    m = as_cmatrix(big)
    n = emb.source_dim
    if m.shape[0] % n or m.shape[0] != m.shape[1]:
        raise ValueError("block matrix size must be a multiple of the source dimension")
    t = m.shape[0] // n
    k = emb.target_dim
    out = np.zeros((t * k, t * k), dtype=complex)
    for r in range(t):
        for c in range(t):
            out[r * k:(r + 1) * k, c * k:(c + 1) * k] = apply_embedding(
                emb, m[r * n:(r + 1) * n, c * n:(c + 1) * n]
            )
    return out


def random_block_upper(n: int, t: int, rng: np.random.Generator) -> np.ndarray:
    """Random ``t x t`` block matrix whose ``n x n`` blocks are upper triangular."""
    m = np.zeros((t * n, t * n), dtype=complex)
    for r in range(t):
        for c in range(t):
            blk = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            m[r * n:(r + 1) * n, c * n:(c + 1) * n] = np.triu(blk)
    return m


def isometry_defect(
    emb: CompressionEmbedding, level: int, samples: int, seed: int = 0, tol: float = 1e-12
) -> float:
    """Largest ``| ||(emb x id_t)(a)|| - ||a|| |`` over random samples at amplification ``level``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a = random_block_upper(emb.source_dim, level, rng)
        worst = max(worst, abs(operator_norm(amplify(emb, a), tol) - operator_norm(a, tol)))
    return worst


def dense_compose_matches(steps: Sequence[CompressionEmbedding]) -> bool:
    """Normal form of the chain agrees with step-by-step application on all matrix units."""
    composite = compose_chain(steps)
    n = steps[0].source_dim
    for i, j in upper_units(n):
        x = matrix_unit(n, i, j)
        seq = x
        for s in steps:
            seq = apply_embedding(s, seq)
        if not np.array_equal(seq, apply_embedding(composite, x)):
            return False
    return True


@dataclass(frozen=True)
class SchurCocycle:
    """Multiplier table ``c`` for the Schur map ``[a_ij] -> [c_ij a_ij]`` on T_n."""

    n: int
    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=complex)
        if c.shape != (self.n, self.n):
            raise ValueError(f"cocycle table must be {self.n}x{self.n}")
        object.__setattr__(self, "c", np.triu(c))

    @classmethod
    def from_potential(cls, d: Sequence[complex]) -> "SchurCocycle":
        """Coboundary ``c_ij = d_i / d_j``; always a unital cocycle."""
        d = np.asarray(d, dtype=complex)
        return cls(len(d), np.outer(d, 1.0 / d))

    def apply(self, a) -> np.ndarray:
        return self.c * np.triu(as_cmatrix(a))


def _schur_direct(c: SchurCocycle, rtol: float) -> bool:
    n, t = c.n, c.c
    if not np.allclose(np.diag(t), 1.0, rtol=rtol, atol=rtol):
        return False
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                if not np.isclose(t[i, k], t[i, j] * t[j, k], rtol=rtol, atol=rtol):
                    return False
    return True


def _schur_brute(c: SchurCocycle, rtol: float) -> bool:
    n = c.n
    if not np.allclose(c.apply(np.eye(n)), np.eye(n), rtol=rtol, atol=rtol):
        return False
    units = [matrix_unit(n, i, j) for i, j in upper_units(n)]
    images = [c.apply(u) for u in units]
    for a, fa in zip(units, images):
        for b, fb in zip(units, images):
            if not np.allclose(c.apply(a @ b), fa @ fb, rtol=rtol, atol=rtol):
                return False
    return True


def schur_validate(c: SchurCocycle, rtol: float = 1e-10) -> bool:
    """Unital cocycle test, checked both from the identity and by brute force.

    Raises ``AssertionError`` if the two routes disagree, since that would mean
    one of them is wrong.
    """
    direct = _schur_direct(c, rtol)
    brute = _schur_brute(c, rtol)
    if direct != brute:
        raise AssertionError(f"cocycle check disagrees: direct={direct}, brute force={brute}")
    return direct
