"""The property battery run by ``complim verify`` and by the acceptance tests.

Every check returns ``(ok, witness)`` where ``witness`` is a short string
locating the first failure, or ``None``.
"""

from __future__ import annotations

import os
from collections import Counter
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from .embeddings import (
    SchurCocycle,
    apply_embedding,
    compose,
    dense_compose_matches,
    is_regular,
    isometry_defect,
    left_inverse_check,
    schur_validate,
)
from .envelope import (
    bratteli,
    boundary_witness,
    dense_edge_multiplicities,
    lemma_check,
    level_structure,
    reaches_identity,
)
from .gallery import ExampleId, build_example, characterize_image, invariant_projection_count
from .matrix_core import is_upper_triangular, matrix_unit, upper_units
from .nest import intervals_of, random_upper
from .system import (
    SystemSpec,
    classify_index_set,
    compact_classification,
    compose_range,
    density_preimage,
    representation_window,
)

Result = tuple[bool, Optional[str]]


def env_int(name: str, default: int) -> int:
    """Integer override from the environment, used to cap CI budgets."""
    raw = os.environ.get(name)
    return int(raw) if raw else default


def steps_upto(spec: SystemSpec, max_dim: int, max_level: int = 64) -> list[int]:
    """Levels ``k`` whose step has source dimension ``<= max_dim``."""
    out = []
    k = 1
    while k <= max_level and (spec.last_level is None or k < spec.last_level) and spec.dim(k) <= max_dim:
        out.append(k)
        k += 1
    return out


def check_homomorphism(spec: SystemSpec, max_dim: int = 16, pairs: int = 100, seed: int = 0) -> Result:
    rng = np.random.default_rng(seed)
    for k in steps_upto(spec, max_dim):
        s = spec.step(k)
        n = s.source_dim
        if not np.array_equal(apply_embedding(s, np.eye(n)), np.eye(s.target_dim)):
            return False, f"step {k} is not unital"
        for t in range(pairs):
            a, b = random_upper(n, rng), random_upper(n, rng)
            if not np.array_equal(apply_embedding(s, a @ b), apply_embedding(s, a) @ apply_embedding(s, b)):
                return False, f"step {k}, pair {t}: phi(ab) != phi(a)phi(b)"
        units = [matrix_unit(n, i, j) for i, j in upper_units(n)]
        imgs = [apply_embedding(s, u) for u in units]
        for a, fa in zip(units, imgs):
            for b, fb in zip(units, imgs):
                if not np.array_equal(apply_embedding(s, a @ b), fa @ fb):
                    return False, f"step {k}: matrix-unit product not preserved"
    return True, None


def check_isometry(
    spec: SystemSpec, max_dim: int = 16, samples: int = 20, levels=(1, 2, 3), tol: float = 1e-8
) -> Result:
    for k in steps_upto(spec, max_dim):
        for t in levels:
            d = isometry_defect(spec.step(k), t, samples, seed=17 * k + t)
            if d > tol:
                return False, f"step {k}, amplification {t}: norm defect {d:.3e}"
    return True, None


def check_regular(spec: SystemSpec, max_dim: int = 16) -> Result:
    for k in steps_upto(spec, max_dim):
        if not is_regular(spec.step(k)):
            return False, f"step {k} maps a matrix unit off the 0-1 matrices"
    return True, None


def check_left_inverse(spec: SystemSpec, max_dim: int = 16, trials: int = 10) -> Result:
    for k in steps_upto(spec, max_dim):
        if not left_inverse_check(spec.step(k), trials, seed=k):
            return False, f"step {k}: compression to the distinguished block is not a left inverse"
    return True, None


def check_composition_oracle(spec: SystemSpec, depth: int = 6) -> Result:
    for j in range(1, depth):
        for k in range(j + 1, depth + 1):
            steps = [spec.step(t) for t in range(j, k)]
            if not dense_compose_matches(steps):
                return False, f"composite {j}->{k} disagrees with sequential application"
            if compose_range(spec, j, k).blocks != _fold(steps).blocks:
                return False, f"composite {j}->{k} differs from the fold of its steps"
    return True, None


def _fold(steps):
    out = steps[0]
    for s in steps[1:]:
        out = compose(s, out)
    return out


def check_associativity(spec: SystemSpec, depth: int = 5) -> Result:
    for k in range(1, depth - 2):
        f, g, h = spec.step(k), spec.step(k + 1), spec.step(k + 2)
        left, right = compose(h, compose(g, f)), compose(compose(h, g), f)
        if left.blocks != right.blocks or left.distinguished != right.distinguished:
            return False, f"composition not associative at level {k}"
    return True, None


def check_substring_stability(spec: SystemSpec, depths=range(2, 7)) -> Result:
    depths = list(depths)
    for k in range(1, max(depths)):
        for m in depths:
            if m < k or m + 1 > max(depths):
                continue
            a = representation_window(spec, k, m)
            b = representation_window(spec, k, m + 1)
            placed = Counter(b.blocks)
            if any(placed[blk] < c for blk, c in Counter(a.blocks).items()):
                return False, f"level {k}: a block moved between depth {m} and {m + 1}"
            if b.lo > a.lo or b.hi < a.hi:
                return False, f"level {k}: window shrank between depth {m} and {m + 1}"
            if a.blocks[a.distinguished_position] != b.blocks[b.distinguished_position]:
                return False, f"level {k}: distinguished block moved at depth {m}"
    return True, None


def check_commuting_diagram(spec: SystemSpec, depths=range(2, 7), samples: int = 3, seed: int = 0) -> Result:
    rng = np.random.default_rng(seed)
    depths = list(depths)
    for m in depths:
        for k in range(1, m):
            n = spec.dim(k)
            wk = representation_window(spec, k, m)
            wk1 = representation_window(spec, k + 1, m)
            inputs = [matrix_unit(n, i, j) for i, j in upper_units(n)[:12]]
            inputs += [random_upper(n, rng) for _ in range(samples)]
            for a in inputs:
                left = wk.window_matrix(a)
                right = wk1.window_matrix(apply_embedding(spec.step(k), a))
                if (wk.lo, wk.hi) != (wk1.lo, wk1.hi) or not np.array_equal(left, right):
                    return False, f"rho_{k} != rho_{k + 1} o phi_{k} at depth {m}"
                if not is_upper_triangular(left):
                    return False, f"rho_{k} image at depth {m} leaves the nest algebra"
    return True, None


def check_density(spec: SystemSpec, instances: int = 50, seed: int = 0, max_width: int = 3) -> Result:
    rng = np.random.default_rng(seed)
    kind = classify_index_set(spec, 8).kind
    bottom = representation_window(spec, 1, 1)
    for t in range(instances):
        below = 0 if kind == "bounded_below" else int(rng.integers(0, max_width + 1))
        above = int(rng.integers(0, max_width + 1))
        if kind == "bounded_above":
            above = min(above, bottom.hi - 1)
        a, b = -below, above
        w = b - a + 1
        data = random_upper(w, rng)
        k, x = density_preimage(spec, (a, b), data)
        win = representation_window(spec, k, k + 1)
        got = win.window_matrix(x)[win.index(a):win.index(b) + 1, win.index(a):win.index(b) + 1]
        if not np.array_equal(got, data):
            return False, f"instance {t}: window [{a},{b}] not reproduced at level {k}"
    return True, None


def check_level_structures(spec: SystemSpec, levels: int = 4, depth: int = 6) -> Result:
    for k in range(1, levels + 1):
        lev = level_structure(spec, k, depth)
        n = spec.dim(k)
        ranks = Counter(r for _, r in lev.summands)
        if ranks[n] != 1:
            return False, f"level {k}: identity summand is not the unique rank-{n} summand"
        for j in range(n):
            if ranks[n - j] > j + 1:
                return False, f"level {k}: {ranks[n - j]} summands of rank {n - j}"
    return True, None


def check_bratteli_oracle(spec: SystemSpec, levels: int = 4, depth: int = 6, max_dim: int = 16) -> Result:
    diag = bratteli(spec, levels, depth)
    for k in range(1, levels):
        if spec.dim(k + 1) > max_dim:
            break
        dense = dense_edge_multiplicities(spec, k, diag.levels[k - 1], diag.levels[k])
        if dense != diag.edges[k - 1]:
            return False, f"edges {k}->{k + 1}: combinatorial {diag.edges[k - 1]} vs dense {dense}"
        for w, (_, rw) in enumerate(diag.levels[k].summands):
            total = sum(c * diag.levels[k - 1].summands[v][1] for (v, ww), c in diag.edges[k - 1].items() if ww == w)
            if total > rw:
                return False, f"node {w} at level {k + 1} overfilled"
    return True, None


def check_reach_identity(spec: SystemSpec, horizon: int = 6) -> Result:
    diag = bratteli(spec, horizon + 1, horizon + 2)
    rep = reaches_identity(diag)
    if not rep.all_reach(horizon):
        return False, f"nodes {[f for f in rep.failures() if f[0] <= horizon]} never reach an identity node"
    return True, None


def check_boundary_witness(max_n: int = 12) -> Result:
    for n in range(2, max_n + 1):
        try:
            boundary_witness(n)
        except AssertionError as exc:
            return False, f"n={n}: {exc}"
    return True, None


def check_interval_counts(max_n: int = 12) -> Result:
    for n in range(1, max_n + 1):
        qs = intervals_of(n)
        if len(qs) != n * (n + 1) // 2:
            return False, f"n={n}: {len(qs)} intervals"
        ranks = Counter(q.rank for q in qs)
        for j in range(n):
            if ranks[n - j] != j + 1:
                return False, f"n={n}: {ranks[n - j]} intervals of rank {n - j}"
    return True, None


def check_lemma(sizes=(2, 3, 4), tol: float = 1e-8) -> Result:
    for n in sizes:
        for p, q in combinations(intervals_of(n), 2):
            if not lemma_check(n, p, q, tol):
                return False, f"n={n}, p={p}, q={q}"
    return True, None


def check_schur(count: int = 100, seed: int = 0) -> Result:
    rng = np.random.default_rng(seed)
    for t in range(count):
        n = int(rng.integers(3, 6))
        d = rng.uniform(0.5, 2.0, n) * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        c = SchurCocycle.from_potential(d)
        if not schur_validate(c):
            return False, f"valid cocycle {t} rejected"
        i = int(rng.integers(0, n))
        j = int(rng.integers(i, n))
        bumped = c.c.copy()
        bumped[i, j] += rng.choice([-1, 1]) * rng.uniform(0.25, 1.0) * (1 + abs(bumped[i, j]))
        if schur_validate(SchurCocycle(n, bumped)):
            return False, f"perturbed cocycle {t} at ({i},{j}) accepted"
    return True, None


def check_compacts(eid: ExampleId, probe: int = 12) -> Result:
    got = compact_classification(build_example(eid), probe)
    want = "no_compacts" if eid.tag == "G" else "contains_finite_rank(1)"
    if str(got) != want:
        return False, f"{eid}: got {got}, expected {want}"
    return True, None


def check_gallery(eid: ExampleId, levels=(1, 2, 3), depth: int = 6) -> Result:
    for k in levels:
        v = characterize_image(eid, k, depth)
        if not v.ok:
            return False, f"level {k}: {v.checks} {v.witness}"
    return True, None


def check_invariant_count(eid: ExampleId) -> Result:
    got = invariant_projection_count(eid)
    if eid.tag == "A" and got != eid.i + 1:
        return False, f"{eid}: {got} invariant projections, expected {eid.i + 1}"
    return True, None


EXAMPLE_CHECKS: dict[str, Callable[..., Result]] = {
    "homomorphism": check_homomorphism,
    "regularity": check_regular,
    "left_inverse": check_left_inverse,
    "isometry": check_isometry,
    "composition_oracle": check_composition_oracle,
    "associativity": check_associativity,
    "substring_stability": check_substring_stability,
    "commuting_diagram": check_commuting_diagram,
    "weak_density": check_density,
    "level_structures": check_level_structures,
    "bratteli_oracle": check_bratteli_oracle,
    "reach_identity": check_reach_identity,
}

GLOBAL_CHECKS: dict[str, Callable[..., Result]] = {
    "interval_counts": check_interval_counts,
    "boundary_witness": check_boundary_witness,
    "lemma_sweep": check_lemma,
    "schur_cocycle": check_schur,
}
