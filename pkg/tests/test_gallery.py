import pytest

from complim.gallery import (
    ExampleId,
    all_examples,
    build_example,
    characterize_image,
    independence_ranks,
    invariant_projection_count,
    parse_example,
)


def test_parse_example():
    assert parse_example("A(3,2)") == ExampleId("A", 3, 2)
    assert parse_example("C(2,-1)") == ExampleId("C", 2, -1)
    assert parse_example("B(4)") == ExampleId("B", 4)
    assert parse_example("G") == ExampleId("G")
    assert str(parse_example("A")) == "A(2,1)"
    for bad in ["H", "A(2,3)", "C(2,1)", "D(2)", "A(2"]:
        with pytest.raises(ValueError):
            parse_example(bad)


def test_link_indices():
    assert ExampleId("A", 3, 2).link_index == 1
    assert ExampleId("C", 3, 0).link_index == 2
    assert ExampleId("C", 3, -2).link_index == 0


def test_all_examples_build():
    names = [str(e) for e in all_examples()]
    assert names == ["A(2,1)", "B(2)", "C(2,0)", "D", "E", "F", "G"]
    for e in all_examples():
        spec = build_example(e, depth=4)
        assert spec.dim(1) == 2 and spec.label


@pytest.mark.parametrize("tag", list("ABCDEFG"))
def test_characterize_image(tag):
    v = characterize_image(ExampleId(tag), 2, 5, samples=4)
    assert v.ok, v.to_dict()


def test_characterize_image_same_level_and_depth():
    assert characterize_image(ExampleId("D"), 3, 3, samples=2).ok
    with pytest.raises(ValueError):
        characterize_image(ExampleId("D"), 4, 3)


def test_linking_detected_for_a():
    v = characterize_image(ExampleId("A", 3, 2), 1, 4, samples=2)
    assert v.checks["linking_enforced"]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_invariant_counts_for_a(n):
    assert [invariant_projection_count(ExampleId("A", n, i)) for i in range(1, n + 1)] == list(range(2, n + 2))


def test_invariant_counts_for_c():
    assert invariant_projection_count(ExampleId("C", 3, 0)) == 2
    assert invariant_projection_count(ExampleId("C", 3, -2)) == 4
    with pytest.raises(ValueError):
        invariant_projection_count(ExampleId("D"))


def test_independence_contrast():
    a = independence_ranks(ExampleId("A", 2, 2), 5)
    c = independence_ranks(ExampleId("C", 2, -1), 5)
    assert len(set(a)) == 1
    assert all(y > x for x, y in zip(c, c[1:]))
    with pytest.raises(ValueError):
        independence_ranks(ExampleId("A", 2, 1))
