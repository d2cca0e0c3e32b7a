"""Direct systems T_{n_1} -> T_{n_2} -> ... of compression embeddings.

Levels are 1-based: ``spec.step(k)`` is the embedding of level ``k`` into
level ``k + 1`` and ``compose_range(spec, j, k)`` maps T_{n_j} into T_{n_k}.
A system is a finite prefix of explicit steps followed by an optional tail
rule that keeps producing steps from the current top dimension.

Infinite objects (the representation of a level on the whole basis, the
index set, the identity multiplicities) are only ever probed to a finite
depth; the depth is always an explicit argument.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np

from .embeddings import (
    CompressionEmbedding,
    EmbeddingError,
    apply_embedding,
    compose,
    validate_embedding,
)
from .nest import Interval

# Tokens for stationary tails.  Each resolves to a list of intervals of T_n.
RANK_ONE_TOKENS = {"diag", "dfh", "dlh", "first", "last"}
HALF_TOKENS = {"fh", "lh"}
NAMED_TOKENS = {"id"} | RANK_ONE_TOKENS | HALF_TOKENS


class SpecFormatError(ValueError):
    """A system spec document is malformed; the message names the offending field."""


def _half(n: int, token: str) -> int:
    if n % 2:
        raise EmbeddingError(f"token {token!r} needs an even size, got {n}")
    return n // 2


def resolve_token(token, n: int) -> list[Interval]:
    """Intervals of T_n denoted by a tail-pattern token."""
    if isinstance(token, dict):
        if "entry" in token:
            r = int(token["entry"])
            return [Interval(n, r, r + 1)]
        if "entry_from_end" in token:
            r = n - 1 - int(token["entry_from_end"])
            return [Interval(n, r, r + 1)]
        raise EmbeddingError(f"unknown token {token!r}")
    if token == "id":
        return [Interval(n, 0, n)]
    if token == "diag":
        return [Interval(n, j, j + 1) for j in range(n)]
    if token == "first":
        return [Interval(n, 0, 1)]
    if token == "last":
        return [Interval(n, n - 1, n)]
    if token == "fh":
        return [Interval(n, 0, _half(n, token))]
    if token == "lh":
        return [Interval(n, _half(n, token), n)]
    if token == "dfh":
        return [Interval(n, j, j + 1) for j in range(_half(n, token))]
    if token == "dlh":
        return [Interval(n, j, j + 1) for j in range(_half(n, token), n)]
    raise EmbeddingError(f"unknown token {token!r}")


def token_is_rank_one(token) -> bool:
    return isinstance(token, dict) or token in RANK_ONE_TOKENS


@dataclass(frozen=True)
class StationaryTail:
    """The same block pattern reapplied at every size, e.g. ``("id", "diag")``."""

    pattern: tuple
    distinguished: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pattern", tuple(self.pattern))
        if not (0 <= self.distinguished < len(self.pattern)):
            raise EmbeddingError("distinguished token index out of range")
        if self.pattern[self.distinguished] != "id":
            raise EmbeddingError("distinguished token must be 'id'")

    def step(self, n: int, t: int) -> CompressionEmbedding:
        blocks: list[Interval] = []
        dist = 0
        for idx, tok in enumerate(self.pattern):
            if idx == self.distinguished:
                dist = len(blocks)
            blocks.extend(resolve_token(tok, n))
        return CompressionEmbedding(n, tuple(blocks), dist)

    @property
    def identity_tokens(self) -> int:
        return sum(1 for tok in self.pattern if tok == "id")

    @property
    def side(self) -> str:
        if self.distinguished == 0:
            return "first"
        if self.distinguished == len(self.pattern) - 1:
            return "last"
        return "middle"

    def to_dict(self) -> dict:
        return {"kind": "stationary", "pattern": list(self.pattern), "distinguished": self.distinguished}


@dataclass(frozen=True)
class ParametricTail:
    """``a -> a + a_pp I_k`` (side ``after``) or ``a_pp I_k + a`` (side ``before``).

    The repeated entry ``p`` is ``index`` counted from the start or, with
    ``origin="end"``, counted back from the last diagonal position.  Step
    ``t`` of the tail uses ``growth[t]``; the last growth value repeats.
    """

    index: int
    origin: str = "start"
    side: str = "after"
    growth: tuple = (1,)

    def __post_init__(self):
        object.__setattr__(self, "growth", tuple(int(g) for g in self.growth))
        if self.origin not in ("start", "end"):
            raise EmbeddingError(f"origin must be 'start' or 'end', got {self.origin!r}")
        if self.side not in ("after", "before"):
            raise EmbeddingError(f"side must be 'after' or 'before', got {self.side!r}")
        if not self.growth or any(g < 1 for g in self.growth):
            raise EmbeddingError("growth sizes must be positive")

    def position(self, n: int) -> int:
        p = self.index if self.origin == "start" else n - 1 - self.index
        if not 0 <= p < n:
            raise EmbeddingError(f"entry position {p} out of range for T_{n}")
        return p

    def step(self, n: int, t: int) -> CompressionEmbedding:
        p = self.position(n)
        k = self.growth[min(t, len(self.growth) - 1)]
        ident = Interval(n, 0, n)
        entry = Interval(n, p, p + 1)
        if self.side == "after":
            return CompressionEmbedding(n, (ident,) + (entry,) * k, 0)
        return CompressionEmbedding(n, (entry,) * k + (ident,), k)

    def to_dict(self) -> dict:
        return {
            "kind": "parametric",
            "index": self.index,
            "origin": self.origin,
            "side": self.side,
            "growth": list(self.growth),
        }


Tail = Union[StationaryTail, ParametricTail]


class SystemSpec:
    """Finite presentation of a direct system.

    Steps past the explicit prefix are produced on demand by the tail rule and
    cached; this is the only mutable state and belongs to the spec's owner.
    """

    def __init__(
        self,
        n1: int,
        steps: Sequence[CompressionEmbedding] = (),
        tail: Optional[Tail] = None,
        label: Optional[str] = None,
        name: Optional[str] = None,
    ):
        if n1 < 1:
            raise EmbeddingError(f"n1 must be positive, got {n1}")
        self.n1 = n1
        self.prefix = tuple(steps)
        self.tail = tail
        self.label = label
        self.name = name
        self._steps: list[CompressionEmbedding] = []
        self._dims = [n1]
        self._composites: dict[tuple[int, int], CompressionEmbedding] = {}
        for i, s in enumerate(self.prefix):
            try:
                self._push(s)
            except EmbeddingError as exc:
                raise EmbeddingError(f"steps[{i}]: {exc}") from None
        if tail is not None:
            try:
                self.step(len(self.prefix) + 1)
            except EmbeddingError as exc:
                raise EmbeddingError(f"tail: {exc}") from None

    def _push(self, s: CompressionEmbedding) -> None:
        top = self._dims[-1]
        if s.source_dim != top:
            raise EmbeddingError(f"source dimension {s.source_dim} does not match current top {top}")
        m = validate_embedding(s)
        if m <= top:
            raise EmbeddingError(f"sizes must strictly increase, got {top} -> {m}")
        self._steps.append(s)
        self._dims.append(m)

    @property
    def last_level(self) -> Optional[int]:
        """Largest level available, or ``None`` when the tail makes the system infinite."""
        return None if self.tail is not None else len(self.prefix) + 1

    @property
    def tail_start(self) -> int:
        """Level whose outgoing step is the first one produced by the tail."""
        return len(self.prefix) + 1

    def _materialize(self, level: int) -> None:
        if level < 1:
            raise IndexError(f"levels start at 1, got {level}")
        while len(self._dims) < level:
            if self.tail is None:
                raise IndexError(
                    f"level {level} beyond the last level {len(self._dims)} of a system without tail"
                )
            t = len(self._steps) - len(self.prefix)
            self._push(self.tail.step(self._dims[-1], t))

    def step(self, k: int) -> CompressionEmbedding:
        self._materialize(k + 1)
        return self._steps[k - 1]

    def dim(self, k: int) -> int:
        self._materialize(k)
        return self._dims[k - 1]

    def dims(self, upto: int) -> list[int]:
        self._materialize(upto)
        return self._dims[:upto]

    def composite(self, j: int, k: int) -> CompressionEmbedding:
        if j > k:
            raise ValueError(f"need j <= k, got {j} > {k}")
        key = (j, k)
        if key not in self._composites:
            if j == k:
                out = CompressionEmbedding.identity(self.dim(j))
            else:
                out = compose(self.step(k - 1), self.composite(j, k - 1))
            self._composites[key] = out
        return self._composites[key]

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {
            "n1": self.n1,
            "steps": [{"blocks": [list(p) for p in s.pairs()], "distinguished": s.distinguished} for s in self.prefix],
        }
        if self.tail is not None:
            doc["tail"] = self.tail.to_dict()
        if self.label:
            doc["label"] = self.label
        if self.name:
            doc["name"] = self.name
        return doc


def compose_range(spec: SystemSpec, j: int, k: int) -> CompressionEmbedding:
    """Normal form of the composite T_{n_j} -> T_{n_k}; ``j == k`` gives the identity."""
    return spec.composite(j, k)


def anchor_offsets(spec: SystemSpec, depth: int) -> list[int]:
    """``A_1 .. A_depth``: where the top-left unit of T_{n_1} lands in each T_{n_t}."""
    out = [0]
    for t in range(1, depth):
        s = spec.step(t)
        out.append(out[-1] + s.offsets[s.distinguished])
    return out


@dataclass(frozen=True)
class AnchoredDecomposition:
    """Blocks of the level-``k`` representation inside the basis window of depth ``m``.

    ``blocks[i] = (interval, basis_offset)``: the compression to ``interval``
    occupies basis indices ``basis_offset .. basis_offset + rank - 1``.
    """

    level: int
    depth: int
    blocks: tuple
    distinguished_position: int
    anchor: int
    embedding: CompressionEmbedding = field(repr=False, compare=False)

    @property
    def lo(self) -> int:
        return -self.anchor

    @property
    def hi(self) -> int:
        return self.embedding.target_dim - self.anchor

    @property
    def size(self) -> int:
        return self.hi - self.lo

    def window_matrix(self, a) -> np.ndarray:
        """The window block of rho_k(a); row/column ``r`` is basis index ``lo + r``."""
        return apply_embedding(self.embedding, a)

    def index(self, basis_index: int) -> int:
        """Row of the window matrix holding ``basis_index``."""
        if not self.lo <= basis_index < self.hi:
            raise IndexError(f"basis index {basis_index} outside window [{self.lo},{self.hi})")
        return basis_index - self.lo


def representation_window(spec: SystemSpec, k: int, depth: int) -> AnchoredDecomposition:
    if k > depth:
        raise ValueError(f"level {k} deeper than probe depth {depth}")
    emb = compose_range(spec, k, depth)
    am = anchor_offsets(spec, depth)[-1]
    blocks = tuple((b, o - am) for b, o in zip(emb.blocks, emb.offsets))
    return AnchoredDecomposition(k, depth, blocks, emb.distinguished, am, emb)


@dataclass(frozen=True)
class IndexSet:
    kind: str  # doubly_infinite | bounded_below | bounded_above | undetermined
    probe: Optional[int] = None

    def __str__(self) -> str:
        return f"undetermined({self.probe})" if self.kind == "undetermined" else self.kind


def classify_index_set(spec: SystemSpec, probe_depth: int) -> IndexSet:
    """Shape of the basis index set of the representation.

    Decided from the tail rule: the distinguished summand is first in every
    tail step (bounded below), last (bounded above), or in the middle (both
    ends grow).  The finite probe is cross-checked against the decision.
    """
    if spec.tail is None:
        return IndexSet("undetermined", min(probe_depth, len(spec.prefix)))
    tail = spec.tail
    if isinstance(tail, ParametricTail):
        kind = "bounded_below" if tail.side == "after" else "bounded_above"
    else:
        kind = {"first": "bounded_below", "last": "bounded_above", "middle": "doubly_infinite"}[tail.side]
    start = spec.tail_start
    if probe_depth > start + 1:
        lo_hi = [
            (w.lo, w.hi)
            for w in (representation_window(spec, 1, d) for d in range(start, probe_depth + 1))
        ]
        lows = {lo for lo, _ in lo_hi}
        grew_low = lo_hi[-1][0] < lo_hi[0][0]
        grew_high = lo_hi[-1][1] > lo_hi[0][1]
        expected = {
            "bounded_below": (len(lows) == 1 and grew_high),
            "bounded_above": (not grew_high and grew_low),
            "doubly_infinite": (grew_low and grew_high),
        }[kind]
        if not expected:
            raise AssertionError(f"probe windows {lo_hi} contradict tail classification {kind}")
    return IndexSet(kind)


def density_preimage(
    spec: SystemSpec, window: tuple[int, int], data, max_depth: int = 64
) -> tuple[int, np.ndarray]:
    """Least level ``k`` and ``x`` in T_{n_k} whose image shows ``data`` on ``window``.

    ``data`` is the upper-triangular block for basis indices ``a .. b``
    inclusive.  Raises ``ValueError`` when the window leaves the index set.
    """
    a, b = window
    if a > 0 or b < 0:
        raise ValueError(f"window must contain basis index 0, got [{a}, {b}]")
    block = np.asarray(data, dtype=complex)
    w = b - a + 1
    if block.shape != (w, w):
        raise ValueError(f"data must be {w}x{w} for window [{a}, {b}]")
    last = spec.last_level if spec.last_level is not None else max_depth
    kind = classify_index_set(spec, 0).kind if spec.tail is not None else None
    ak = 0
    for k in range(1, last + 1):
        if k > 1:
            s = spec.step(k - 1)
            ak += s.offsets[s.distinguished]
        nk = spec.dim(k)
        if -ak <= a and b < nk - ak:
            x = np.zeros((nk, nk), dtype=complex)
            x[a + ak:b + ak + 1, a + ak:b + ak + 1] = block
            return k, x
        if k > spec.tail_start:
            if kind == "bounded_below" and a < -ak:
                raise ValueError(f"basis index {a} outside an index set bounded below by {-ak}")
            if kind == "bounded_above" and b >= nk - ak:
                raise ValueError(f"basis index {b} outside an index set bounded above by {nk - ak - 1}")
    raise ValueError(f"window [{a}, {b}] not covered by any level up to {last}")


def identity_multiplicity(spec: SystemSpec, k: int, depth: int) -> int:
    """Identity summands in the level-``k`` composite at ``depth``; nondecreasing in depth."""
    if k > depth:
        raise ValueError(f"level {k} deeper than probe depth {depth}")
    return compose_range(spec, k, depth).identity_count()


@dataclass(frozen=True)
class CompactClass:
    kind: str  # no_compacts | contains_finite_rank | undetermined
    value: Optional[int] = None
    certificate: str = ""
    series: tuple = ()

    def __str__(self) -> str:
        if self.kind == "contains_finite_rank":
            return f"contains_finite_rank({self.value})"
        if self.kind == "undetermined":
            return f"undetermined({self.value})"
        return self.kind


def compact_classification(spec: SystemSpec, probe_depth: int) -> CompactClass:
    """Decide whether the image contains nonzero compact operators.

    Only tails are decisive.  A stationary tail with two or more identity
    summands multiplies the identity count each step, so it is unbounded.
    With exactly one identity summand, the count can only grow if some other
    summand swallows the distinguished copy; rank-one summands never can
    (identity copies have rank at least 2 past level 1), and any other
    summand is checked at each probed level.
    """
    if spec.tail is None:
        return CompactClass("undetermined", min(probe_depth, len(spec.prefix)), "no tail rule")
    k0 = spec.tail_start
    if spec.dim(k0) < 2:
        k0 += 1
    if probe_depth < k0 + 2:
        return CompactClass("undetermined", probe_depth, "probe too shallow for the tail")
    series = tuple(identity_multiplicity(spec, k0, d) for d in range(k0, probe_depth + 1))
    tail = spec.tail
    if isinstance(tail, StationaryTail) and tail.identity_tokens >= 2:
        if not all(b >= tail.identity_tokens * a for a, b in zip(series, series[1:])):
            raise AssertionError(f"identity counts {series} do not grow geometrically")
        return CompactClass(
            "no_compacts",
            None,
            f"tail step has {tail.identity_tokens} identity summands; counts {list(series)}",
            series,
        )
    if isinstance(tail, ParametricTail):
        structural = True
        risky: list = []
    else:
        risky = [tok for i, tok in enumerate(tail.pattern) if i != tail.distinguished and not token_is_rank_one(tok)]
        structural = not risky
    if len(set(series)) != 1:
        return CompactClass("undetermined", probe_depth, f"identity counts {list(series)} not stationary", series)
    if structural:
        cert = "single identity summand; all other summands have rank one"
    else:
        for t in range(k0, probe_depth):
            region = compose_range(spec, k0, t).distinguished_interval
            s = spec.step(t)
            for q in s.blocks:
                if not q.is_identity and q.start <= region.start and region.end <= q.end:
                    return CompactClass("undetermined", probe_depth, f"{q} covers the distinguished copy at level {t}", series)
        cert = f"single identity summand; summands {risky} miss the distinguished copy at every probed level"
    return CompactClass("contains_finite_rank", series[-1], cert, series)


# -- spec documents ---------------------------------------------------------

def _parse_tail(doc: dict) -> Tail:
    kind = doc.get("kind")
    if kind == "stationary":
        if "pattern" not in doc:
            raise SpecFormatError("tail.pattern: missing")
        pattern = []
        for i, tok in enumerate(doc["pattern"]):
            if isinstance(tok, str) and tok not in NAMED_TOKENS:
                raise SpecFormatError(f"tail.pattern[{i}]: unknown token {tok!r}")
            if isinstance(tok, dict) and not ({"entry"} == set(tok) or {"entry_from_end"} == set(tok)):
                raise SpecFormatError(f"tail.pattern[{i}]: unknown token {tok!r}")
            pattern.append(tok)
        try:
            return StationaryTail(tuple(pattern), int(doc.get("distinguished", 0)))
        except EmbeddingError as exc:
            raise SpecFormatError(f"tail: {exc}") from None
    if kind == "parametric":
        try:
            return ParametricTail(
                int(doc["index"]),
                doc.get("origin", "start"),
                doc.get("side", "after"),
                tuple(doc.get("growth", (1,))),
            )
        except KeyError:
            raise SpecFormatError("tail.index: missing") from None
        except EmbeddingError as exc:
            raise SpecFormatError(f"tail: {exc}") from None
    raise SpecFormatError(f"tail.kind: expected 'stationary' or 'parametric', got {kind!r}")


def spec_from_dict(doc: dict) -> SystemSpec:
    """Parse a spec document; errors carry the position of the bad field."""
    if not isinstance(doc, dict):
        raise SpecFormatError("spec document must be an object")
    if "n1" not in doc:
        raise SpecFormatError("n1: missing")
    try:
        n = int(doc["n1"])
    except (TypeError, ValueError):
        raise SpecFormatError(f"n1: not an integer: {doc['n1']!r}") from None
    if n < 1:
        raise SpecFormatError(f"n1: must be positive, got {n}")
    steps = []
    for i, st in enumerate(doc.get("steps", [])):
        where = f"steps[{i}]"
        if "blocks" not in st:
            raise SpecFormatError(f"{where}.blocks: missing")
        pairs = []
        for j, blk in enumerate(st["blocks"]):
            if not (isinstance(blk, (list, tuple)) and len(blk) == 2):
                raise SpecFormatError(f"{where}.blocks[{j}]: expected [start, end], got {blk!r}")
            s, e = int(blk[0]), int(blk[1])
            if not 0 <= s < e <= n:
                raise SpecFormatError(f"{where}.blocks[{j}]: [{s},{e}) is not a nonzero interval of T_{n}")
            pairs.append((s, e))
        emb = CompressionEmbedding.from_pairs(n, pairs, int(st.get("distinguished", 0)))
        try:
            m = validate_embedding(emb)
        except EmbeddingError as exc:
            raise SpecFormatError(f"{where}: {exc}") from None
        if m <= n:
            raise SpecFormatError(f"{where}: sizes must strictly increase, got {n} -> {m}")
        steps.append(emb)
        n = m
    tail = _parse_tail(doc["tail"]) if doc.get("tail") is not None else None
    try:
        return SystemSpec(int(doc["n1"]), steps, tail, doc.get("label"), doc.get("name"))
    except EmbeddingError as exc:
        raise SpecFormatError(str(exc)) from None


def load_spec(path: Union[str, Path]) -> SystemSpec:
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return spec_from_dict(doc)
