import json

import numpy as np
import pytest

from complim.embeddings import CompressionEmbedding, EmbeddingError
from complim.gallery import ExampleId, build_example
from complim.nest import Interval
from complim.system import (
    ParametricTail,
    SpecFormatError,
    StationaryTail,
    SystemSpec,
    anchor_offsets,
    classify_index_set,
    compact_classification,
    compose_range,
    density_preimage,
    identity_multiplicity,
    load_spec,
    representation_window,
    resolve_token,
    spec_from_dict,
)


def ex(tag, *args):
    return build_example(ExampleId(tag, *args))


def test_resolve_tokens():
    assert resolve_token("lh", 4) == [Interval(4, 2, 4)]
    assert resolve_token("dfh", 4) == [Interval(4, 0, 1), Interval(4, 1, 2)]
    assert resolve_token({"entry_from_end": 0}, 3) == [Interval(3, 2, 3)]
    with pytest.raises(EmbeddingError):
        resolve_token("lh", 3)
    with pytest.raises(EmbeddingError):
        resolve_token("bogus", 3)


def test_example_steps():
    a = ex("A", 2, 1)
    assert a.step(1).pairs() == [(0, 2), (0, 1)]
    assert a.dims(4) == [2, 3, 4, 5]
    c = ex("C", 2, 0)
    assert c.step(2).pairs() == [(2, 3), (0, 3)] and c.step(2).distinguished == 1
    d = ex("D")
    assert d.dims(4) == [2, 4, 8, 16]
    assert d.step(1).pairs() == [(0, 2), (0, 1), (1, 2)]


def test_growth_repeats_last_value():
    s = build_example(ExampleId("B", 2, growth=(1, 3)))
    assert s.dims(4) == [2, 3, 6, 9]


def test_compose_range_identity_and_composite():
    d = ex("D")
    assert compose_range(d, 2, 2) == CompressionEmbedding.identity(4)
    e = compose_range(d, 1, 3)
    assert e.target_dim == 8
    assert e.identity_count() == 1
    assert sorted(b.rank for b in e.blocks) == [1] * 6 + [2]
    with pytest.raises(ValueError):
        compose_range(d, 3, 1)


def test_anchor_offsets():
    assert anchor_offsets(ex("A", 2, 1), 4) == [0, 0, 0, 0]
    assert anchor_offsets(ex("C", 2, 0), 5) == [0, 1, 2, 3, 4]


def test_representation_window_coordinates():
    c = ex("C", 2, 0)
    w = representation_window(c, 1, 3)
    assert (w.lo, w.hi) == (-2, 2)
    assert w.blocks[w.distinguished_position] == (Interval(2, 0, 2), 0)
    x = np.array([[1, 2], [0, 3]])
    got = w.window_matrix(x)
    assert np.array_equal(got[w.index(0):w.index(1) + 1, w.index(0):w.index(1) + 1], x)
    assert got[w.index(-1), w.index(-1)] == 3
    with pytest.raises(IndexError):
        w.index(2)


def test_classify_index_set():
    assert classify_index_set(ex("A", 2, 1), 6).kind == "bounded_below"
    assert classify_index_set(ex("C", 2, 0), 6).kind == "bounded_above"
    assert classify_index_set(ex("G"), 6).kind == "bounded_below"
    toy = SystemSpec(2, (), StationaryTail(("last", "id", "first"), 1))
    assert classify_index_set(toy, 6).kind == "doubly_infinite"
    finite = SystemSpec(2, [CompressionEmbedding.standard(2, 2)])
    assert str(classify_index_set(finite, 9)) == "undetermined(1)"


def test_density_preimage_exact():
    c = ex("C", 2, 0)
    data = np.triu(np.arange(1, 17).reshape(4, 4)).astype(complex)
    k, x = density_preimage(c, (-2, 1), data)
    w = representation_window(c, k, k + 1)
    got = w.window_matrix(x)[w.index(-2):w.index(1) + 1, w.index(-2):w.index(1) + 1]
    assert np.array_equal(got, data)


def test_density_preimage_rejects_outside_index_set():
    with pytest.raises(ValueError, match="bounded below"):
        density_preimage(ex("A", 2, 1), (-1, 0), np.eye(2))
    with pytest.raises(ValueError, match="bounded above"):
        density_preimage(ex("C", 2, 0), (0, 2), np.eye(3))
    with pytest.raises(ValueError):
        density_preimage(ex("A", 2, 1), (1, 2), np.eye(2))


def test_density_preimage_stops_early_on_fast_growth():
    k, _ = density_preimage(ex("G"), (0, 9), np.eye(10))
    assert k == 4


def test_identity_multiplicity():
    g = ex("G")
    assert [identity_multiplicity(g, 1, d) for d in range(1, 6)] == [1, 2, 4, 8, 16]
    assert identity_multiplicity(ex("D"), 1, 2) == 1


@pytest.mark.parametrize("tag", list("ABCDEF"))
def test_compacts_single_identity(tag):
    c = compact_classification(build_example(ExampleId(tag)), 12)
    assert str(c) == "contains_finite_rank(1)"
    assert c.certificate


def test_compacts_doubling_and_finite():
    assert str(compact_classification(ex("G"), 12)) == "no_compacts"
    finite = SystemSpec(2, [CompressionEmbedding.standard(2, 2), CompressionEmbedding.standard(4, 2)])
    assert str(compact_classification(finite, 12)) == "undetermined(2)"


def test_spec_document_round_trip(tmp_path):
    doc = {
        "n1": 2,
        "steps": [{"blocks": [[0, 2], [1, 2]], "distinguished": 0}],
        "tail": {"kind": "stationary", "pattern": ["id", "diag"], "distinguished": 0},
        "name": "toy",
    }
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(doc))
    s = load_spec(path)
    assert s.dims(3) == [2, 3, 6]
    assert spec_from_dict(s.to_dict()).dims(3) == [2, 3, 6]


def test_parametric_tail_document():
    s = spec_from_dict({"n1": 3, "tail": {"kind": "parametric", "index": 1, "growth": [2]}})
    assert s.step(1).pairs() == [(0, 3), (1, 2), (1, 2)]
    assert isinstance(s.tail, ParametricTail)


@pytest.mark.parametrize(
    "doc, where",
    [
        ({}, "n1"),
        ({"n1": "x"}, "n1"),
        ({"n1": 2, "steps": [{}]}, r"steps\[0\]\.blocks"),
        ({"n1": 2, "steps": [{"blocks": [[0, 3]]}]}, r"steps\[0\]\.blocks\[0\]"),
        ({"n1": 2, "steps": [{"blocks": [[0, 2], [1, 2]], "distinguished": 1}]}, r"steps\[0\]"),
        ({"n1": 2, "steps": [{"blocks": [[0, 2]]}]}, "strictly increase"),
        ({"n1": 2, "tail": {"kind": "weird"}}, "tail.kind"),
        ({"n1": 2, "tail": {"kind": "stationary", "pattern": ["id", "zz"]}}, r"tail\.pattern\[1\]"),
        ({"n1": 3, "tail": {"kind": "stationary", "pattern": ["id", "lh"]}}, "tail"),
        ({"n1": 2, "tail": {"kind": "parametric"}}, "tail.index"),
    ],
)
def test_spec_errors_are_positional(doc, where):
    with pytest.raises(SpecFormatError, match=where):
        spec_from_dict(doc)


def test_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{ nope")
    with pytest.raises(SpecFormatError, match="line 1"):
        load_spec(p)
