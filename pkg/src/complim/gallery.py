"""The seven example systems and checks of their image algebras on finite windows.

Index conventions, fixed here and nowhere else:

* Family A is parametrized by the 1-based diagonal entry ``i`` (``1 <= i <= n``)
  that is repeated; it becomes the 0-based interval ``[i-1, i)``.  The basis
  starts at 0, so the linked basis index is ``i - 1``.
* Family C uses the non-positive labels ``-m+1 .. 0`` for T_m, so ``i`` runs
  over ``-n+1 .. 0`` and is the 0-based position ``m - 1 + i`` of T_m.  The
  anchored basis for C puts T_{n_1} on indices ``0 .. n-1``; the linked basis
  index is ``n - 1 + i`` and the basis is bounded above by ``n - 1``.
* Invariant-projection counts include the zero and identity projections.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrix_core import matrix_unit, span_contains, upper_units
from .nest import random_upper
from .system import (
    ParametricTail,
    StationaryTail,
    SystemSpec,
    density_preimage,
    representation_window,
)

FAMILIES = "ABCDEFG"

IMAGE_LABELS = {
    "A": "B_i: s in K_N + CI with the i-th diagonal entry equal to the scalar part",
    "B": "K_N + CI",
    "C": "s in K_N + CI with the i-th diagonal entry equal to the scalar part at -infinity",
    "D": "K_N^0 + D_AP(2^inf)",
    "E": "K_N + D_AP(2^inf)",
    "F": "K_N + S_N(2^inf)",
    "G": "S_N(2^inf)",
}

ENVELOPE_LABELS = {
    "A": "K + CI",
    "B": "K + CI",
    "C": "K + CI",
    "D": "K + D_AP(2^inf)",
    "E": "K + D_AP(2^inf)",
    "F": "K + S(2^inf)",
    "G": "UHF S(2^inf)",
}

_PATTERNS = {
    "D": ("id", "diag"),
    "E": ("id", "dlh", "dlh"),
    "F": ("id", "lh", "lh"),
    "G": ("id", "id"),
}


@dataclass(frozen=True)
class ExampleId:
    tag: str
    n: int = 2
    i: Optional[int] = None
    growth: tuple = (1,)

    def __post_init__(self):
        if self.tag not in FAMILIES:
            raise ValueError(f"unknown example {self.tag!r}")
        object.__setattr__(self, "growth", tuple(self.growth))
        if self.tag in "DEFG":
            if self.n != 2:
                raise ValueError(f"example {self.tag} starts at n = 2")
            return
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.tag == "A":
            i = 1 if self.i is None else self.i
            if not 1 <= i <= self.n:
                raise ValueError(f"A needs 1 <= i <= n, got i={i}, n={self.n}")
            object.__setattr__(self, "i", i)
        elif self.tag == "C":
            i = 0 if self.i is None else self.i
            if not -self.n + 1 <= i <= 0:
                raise ValueError(f"C needs -n+1 <= i <= 0, got i={i}, n={self.n}")
            object.__setattr__(self, "i", i)

    def __str__(self) -> str:
        if self.tag in "AC":
            return f"{self.tag}({self.n},{self.i})"
        if self.tag == "B":
            return f"B({self.n})"
        return self.tag

    @property
    def link_index(self) -> Optional[int]:
        """Basis index whose diagonal entry equals the scalar tail (families A and C)."""
        if self.tag == "A":
            return self.i - 1
        if self.tag == "C":
            return self.n - 1 + self.i
        return None


_TAG_RE = re.compile(r"^\s*([A-G])\s*(?:\(\s*([-\d\s,]*)\s*\))?\s*$")


def parse_example(text: str, growth: tuple = (1,)) -> ExampleId:
    """Parse ``"A(2,1)"``, ``"B(3)"``, ``"C(2,-1)"`` or a bare letter."""
    m = _TAG_RE.match(text)
    if not m:
        raise ValueError(f"cannot parse example tag {text!r}")
    tag, args = m.group(1), m.group(2)
    nums = [int(a) for a in args.split(",") if a.strip()] if args else []
    if tag in "AC":
        return ExampleId(tag, *nums[:2], growth=growth) if nums else ExampleId(tag, growth=growth)
    if tag == "B":
        return ExampleId("B", nums[0] if nums else 2, growth=growth)
    if nums:
        raise ValueError(f"example {tag} takes no parameters")
    return ExampleId(tag)


def all_examples() -> list[ExampleId]:
    return [ExampleId("A", 2, 1), ExampleId("B", 2), ExampleId("C", 2, 0)] + [
        ExampleId(t) for t in "DEFG"
    ]


def build_example(eid: ExampleId, depth: Optional[int] = None) -> SystemSpec:
    """System realizing the example; ``depth`` pre-materializes that many levels."""
    if eid.tag == "A":
        tail = ParametricTail(eid.i - 1, "start", "after", eid.growth)
    elif eid.tag == "B":
        tail = ParametricTail(0, "end", "after", eid.growth)
    elif eid.tag == "C":
        tail = ParametricTail(-eid.i, "end", "before", eid.growth)
    else:
        tail = StationaryTail(_PATTERNS[eid.tag], 0)
    spec = SystemSpec(eid.n, (), tail, label=ENVELOPE_LABELS[eid.tag], name=str(eid))
    if depth is not None:
        spec.dim(depth)
    return spec


# -- image characterizations ------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    ok: bool
    checks: dict
    witness: Optional[str] = None

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "witness": self.witness}


def _generator_windows(spec: SystemSpec, k: int, depth: int):
    win = representation_window(spec, k, depth)
    n = spec.dim(k)
    return win, [((i, j), win.window_matrix(matrix_unit(n, i, j))) for i, j in upper_units(n)]


def _finite_region(win) -> tuple[int, int]:
    """Rows of the window matrix covered by the distinguished summand."""
    _, off = win.blocks[win.distinguished_position]
    start = win.index(off)
    return start, start + win.embedding.source_dim


def _scalar_tail_form(W, region, link_row) -> Optional[str]:
    r0, r1 = region
    alpha = W[link_row, link_row]
    outside = np.ones(W.shape[0], dtype=bool)
    outside[r0:r1] = False
    rest = W.copy()
    rest[r0:r1, r0:r1] = 0
    expected = np.diag(np.where(outside, alpha, 0))
    if not np.array_equal(rest, expected):
        bad = np.argwhere(rest != expected)[0]
        return f"entry {tuple(int(v) for v in bad)} breaks finite + scalar tail with scalar {alpha}"
    return None


def _periodic_diag_form(W, N, free) -> Optional[str]:
    """Off-diagonal support in the leading N x N block; diagonal periodic after ``free`` with period N - free."""
    off = W - np.diag(np.diag(W))
    if np.any(off[N:, :]) or np.any(off[:, N:]):
        return "off-diagonal entry outside the leading block"
    d = np.diag(W)
    period = N - free
    for p in range(N, len(d)):
        if d[p] != d[free + (p - free) % period]:
            return f"diagonal entry {p} breaks period {period}"
    return None


def _periodic_block_form(W, N, head) -> Optional[str]:
    """Beyond ``head`` the window is a repeated block diagonal of size ``N - head``."""
    P = N - head
    ref = W[head:N, head:N]
    size = W.shape[0]
    for p in range(size):
        for q in range(size):
            if p < head and q < head:
                continue
            if p < head or q < head:
                inside = q < N and p < N
                if not inside and W[p, q] != 0:
                    return f"entry ({p},{q}) couples the head to the periodic part"
                continue
            bp, bq = (p - head) // P, (q - head) // P
            want = ref[(p - head) % P, (q - head) % P] if bp == bq else 0
            if W[p, q] != want:
                return f"entry ({p},{q}) breaks the periodic block pattern of period {P}"
    return None


def _check_generators(eid: ExampleId, spec: SystemSpec, k: int, depth: int) -> Optional[str]:
    win, gens = _generator_windows(spec, k, depth)
    region = _finite_region(win)
    N = spec.dim(k)
    for (i, j), W in gens:
        if eid.tag in "ABC":
            link = win.index(eid.link_index) if eid.tag != "B" else region[1] - 1
            msg = _scalar_tail_form(W, region, link)
        elif eid.tag == "D":
            msg = _periodic_diag_form(W, N, 0)
        elif eid.tag == "E":
            msg = _periodic_diag_form(W, N, N // 2)
        elif eid.tag == "F":
            msg = _periodic_block_form(W, N, N // 2)
        else:
            msg = _periodic_block_form(W, N, 0)
        if msg:
            return f"generator e_{i}{j}: {msg}"
    return None


def _normal_form_sample(eid: ExampleId, spec: SystemSpec, k: int, depth: int, rng):
    """A random element of the family's normal form on the depth window, with its preimage."""
    win = representation_window(spec, k, depth)
    N = spec.dim(k)
    size = win.size
    if eid.tag in "ABC":
        x = random_upper(N, rng)
        r0, r1 = _finite_region(win)
        link = win.index(eid.link_index) - r0 if eid.tag != "B" else N - 1
        alpha = x[link, link]
        s = np.diag(np.full(size, alpha))
        s[r0:r1, r0:r1] = x
        return x, s
    if eid.tag in "DE":
        half = N // 2
        period = 2 ** int(rng.integers(0, int(np.log2(half)) + 1)) if eid.tag == "E" else 2 ** int(rng.integers(0, int(np.log2(N)) + 1))
        base = random_upper(period, rng)
        pattern = np.diag(base)
        d = np.array([pattern[p % period] for p in range(size)])
        s = np.diag(d)
        c = np.triu(random_upper(N, rng), 1)
        s[:N, :N] += c
        if eid.tag == "E":
            s[:half, :half] += np.diag(np.diag(random_upper(half, rng)))
        return s[:N, :N].copy(), s
    head = N // 2 if eid.tag == "F" else 0
    P = N - head
    period = 2 ** int(rng.integers(0, int(np.log2(P)) + 1))
    b = random_upper(period, rng)
    s = np.zeros((size, size), dtype=complex)
    for t in range(head, size, period):
        s[t:t + period, t:t + period] = b
    if eid.tag == "F":
        c = random_upper(N, rng)
        c[head:, :] = 0  # compact part lives in the head rows only
        s[:N, :N] += c
    return s[:N, :N].copy(), s


def _linking_enforced(eid: ExampleId, spec: SystemSpec, k: int, depth: int) -> bool:
    """A perturbation that breaks the family's linking is outside the truncated image span."""
    win, gens = _generator_windows(spec, k, depth)
    basis = [W for _, W in gens]
    size = win.size
    N = spec.dim(k)
    bad = np.zeros((size, size), dtype=complex)
    if eid.tag in "ABC":
        r0, r1 = _finite_region(win)
        link = win.index(eid.link_index) if eid.tag != "B" else r1 - 1
        bad[link, link] = 1.0  # scalar tail stays 0
    elif eid.tag == "D":
        bad[0, 0] = 1.0  # a diagonal bump that is not periodic
    elif eid.tag == "E":
        bad[N - 1, N - 1] = 1.0  # the linked half cannot move alone
    else:
        bad[N - 1, N - 1] = 1.0
    return not span_contains(basis, bad)


def characterize_image(eid: ExampleId, k: int, depth: int, samples: int = 10, seed: int = 0) -> Verdict:
    """Check the family's normal form on the probe window, in both directions."""
    if k > depth:
        raise ValueError(f"level {k} deeper than probe depth {depth}")
    spec = build_example(eid)
    checks = {}
    witness = _check_generators(eid, spec, k, depth)
    checks["generators_in_normal_form"] = witness is None
    rng = np.random.default_rng(seed)
    converse = True
    for _ in range(samples):
        x, s = _normal_form_sample(eid, spec, k, depth, rng)
        if not np.array_equal(representation_window(spec, k, depth).window_matrix(x), s):
            converse = False
            witness = witness or "normal-form element not reproduced by its preimage"
            break
        win = representation_window(spec, k, depth)
        lo = max(win.lo, -2)
        hi = min(win.hi - 1, 2)
        block = s[win.index(lo):win.index(hi) + 1, win.index(lo):win.index(hi) + 1]
        kk, xx = density_preimage(spec, (lo, hi), block)
        win2 = representation_window(spec, kk, max(kk, depth))
        got = win2.window_matrix(xx)[win2.index(lo):win2.index(hi) + 1, win2.index(lo):win2.index(hi) + 1]
        if not np.array_equal(got, block):
            converse = False
            witness = witness or f"window data on [{lo},{hi}] has no exact preimage"
            break
    checks["normal_form_attainable"] = converse
    # at depth == k the window is T_{n_k} itself and shows no linking
    checks["linking_enforced"] = _linking_enforced(eid, spec, k, max(depth, k + 1))
    if not checks["linking_enforced"]:
        witness = witness or "linking-violating element found in the truncated image span"
    return Verdict(all(checks.values()), checks, witness)


# -- invariant projections --------------------------------------------------

def _nest_prefix(win, j: int) -> np.ndarray:
    """Window truncation of the nest projection onto basis indices ``<= j``."""
    d = np.array([1.0 if (b <= j) else 0.0 for b in range(win.lo, win.hi)])
    return np.diag(d).astype(complex)


def invariant_projection_count(eid: ExampleId, probe: Optional[int] = None) -> int:
    """Invariant projections of the image that lie in the image, zero and identity included.

    The nest projections are ``p_j`` = span of basis vectors with index ``<= j``.
    Membership is decided by the linking predicate and cross-checked with
    :func:`span_contains` against a truncated image.
    """
    if eid.tag not in "AC":
        raise ValueError(f"no characterized membership predicate for family {eid.tag}")
    spec = build_example(eid)
    L = eid.link_index
    probe = probe if probe is not None else eid.n + 2
    if eid.tag == "A":
        candidates = list(range(probe))
        predicate = {j: j < L for j in candidates}
    else:
        top = eid.n - 1
        candidates = [j for j in range(top - probe, top)]
        predicate = {j: j >= L for j in candidates}
    k = 1
    while True:
        win = representation_window(spec, k, k)
        if eid.tag == "A" and win.hi > probe:
            break
        if eid.tag == "C" and win.lo <= min(candidates):
            break
        k += 1
    win, gens = _generator_windows(spec, k, k + 2)
    basis = [W for _, W in gens]
    for j in candidates:
        got = span_contains(basis, _nest_prefix(win, j))
        if got != predicate[j]:
            raise AssertionError(
                f"{eid}: membership of p_{j} is {got} in the truncated image, predicate says {predicate[j]}"
            )
    if not span_contains(basis, np.eye(win.size)) or not span_contains(basis, np.zeros((win.size, win.size))):
        raise AssertionError(f"{eid}: identity or zero missing from the truncated image")
    return 2 + sum(predicate.values())


def independence_ranks(eid: ExampleId, levels: int = 5) -> list[int]:
    """Ranks of ``{x p}`` for ``x`` over truncated level images and a fixed invariant ``p``.

    ``p`` is the smallest nontrivial invariant projection lying in the image.
    For family A it has finite rank, so the ranks stay bounded; for family C
    it has infinite rank and the ranks keep growing with the level.
    """
    if eid.tag not in "AC":
        raise ValueError("independence probe is defined for families A and C")
    L = eid.link_index
    if eid.tag == "A":
        if L == 0:
            raise ValueError(f"{eid} has no nontrivial invariant projection in its image")
        j = 0
    else:
        if L == eid.n - 1:
            raise ValueError(f"{eid} has no nontrivial invariant projection in its image")
        j = L
    spec = build_example(eid)
    ranks = []
    for k in range(1, levels + 1):
        win, gens = _generator_windows(spec, k, k + 1)
        p = _nest_prefix(win, j)
        rows = np.array([(W @ p).ravel() for _, W in gens])
        ranks.append(int(np.linalg.matrix_rank(rows)))
    return ranks
