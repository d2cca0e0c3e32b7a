from itertools import combinations

import numpy as np
import pytest

from complim.envelope import (
    boundary_witness,
    bratteli,
    dense_edge_multiplicities,
    diagonal_masa_defect,
    envelope_report,
    lemma_check,
    level_structure,
    reaches_identity,
    to_dot,
    witness_isolated,
)
from complim.gallery import ExampleId, build_example
from complim.nest import Interval, intervals_of


def ex(tag, *args):
    return build_example(ExampleId(tag, *args))


def test_level_structures():
    assert level_structure(ex("A", 2, 1), 1, 5).describe() == "M_2 + C"
    assert level_structure(ex("D"), 2, 5).describe() == "M_4 + C + C + C + C"
    assert level_structure(ex("G"), 3, 5).describe() == "M_8"
    lev = level_structure(ex("F"), 1, 5)
    assert lev.intervals[0].is_identity and lev.identity_summand == 0


def test_bratteli_doubling_chain():
    diag = bratteli(ex("G"), 4, 5)
    assert [len(lv.summands) for lv in diag.levels] == [1, 1, 1, 1]
    assert all(tab == {(0, 0): 2} for tab in diag.edges)


@pytest.mark.parametrize("tag", list("ABCDEFG"))
def test_bratteli_matches_dense_oracle(tag):
    spec = build_example(ExampleId(tag))
    diag = bratteli(spec, 3, 5)
    for k in (1, 2):
        assert dense_edge_multiplicities(spec, k, diag.levels[k - 1], diag.levels[k]) == diag.edges[k - 1]


def test_reach_identity_and_horizon():
    diag = bratteli(ex("D"), 4, 6)
    rep = reaches_identity(diag)
    assert rep.all_reach(3)
    # last-level rank-one nodes have nowhere to go
    assert not rep.all_reach()
    assert all(lv == 4 for lv, _ in rep.failures())


@pytest.mark.parametrize("n", [2, 5, 12])
def test_boundary_witness(n):
    v = boundary_witness(n)
    assert v[0, n - 1] == 1
    proper = [q for q in intervals_of(n) if not q.is_identity]
    assert len(proper) == n * (n + 1) // 2 - 1
    assert all(not np.any(v[q.start:q.end, q.start:q.end]) for q in proper)


def test_boundary_witness_counts():
    assert len([q for q in intervals_of(4) if not q.is_identity]) == 9
    assert len([q for q in intervals_of(12) if not q.is_identity]) == 77


def test_witness_isolated():
    assert witness_isolated(ex("D"), 1, 4)
    assert witness_isolated(ex("G"), 2, 4)


def test_lemma_examples():
    assert lemma_check(3, Interval(3, 0, 2), Interval(3, 1, 2))  # 4 + 1
    assert lemma_check(4, Interval(4, 0, 2), Interval(4, 2, 4))  # 4 + 4
    with pytest.raises(ValueError):
        lemma_check(2, Interval(2, 0, 1), Interval(2, 0, 1))


def test_lemma_exhaustive_small():
    for p, q in combinations(intervals_of(3), 2):
        assert lemma_check(3, p, q)


def test_masa_defect():
    a = diagonal_masa_defect(ex("A", 2, 1), 2, 6)
    assert (a.window_diag_dim, a.gap) == (7, 4)
    g = diagonal_masa_defect(ex("G"), 2, 4)
    assert (g.window_diag_dim, g.gap) == (16, 12)
    assert "not by itself a proof" in g.note


def test_envelope_report_verdict():
    rep = envelope_report(ex("D"), 4, 6)
    assert rep["reach_ok"] and rep["witness_ok"]
    assert rep["verdict"].endswith("horizon 3")
    assert rep["compacts"] == "contains_finite_rank(1)"


def test_dot_output():
    dot = to_dot(bratteli(ex("D"), 3, 4))
    assert dot.startswith("digraph bratteli {")
    assert dot.count("rank=same") == 3
    assert 'label="M_2 @ [0,2)", peripheries=2' in dot
    assert '"L1N0" -> "L2N0" [label="1"]' in dot
