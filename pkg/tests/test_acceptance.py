"""Acceptance criteria, run at their stated sizes and tolerances.

Each test prints one ``criterion N: PASS|FAIL`` line, visible in ``pytest -v``
output even with capture on.
"""

import pytest

from complim import checks
from complim.gallery import ExampleId, all_examples, build_example

EXAMPLES = all_examples()
REACH_EXAMPLES = [ExampleId("A", 2, 1), ExampleId("B", 2), ExampleId("C", 2, 0)] + [ExampleId(t) for t in "DEF"]


@pytest.fixture
def report(capsys):
    def _report(number, title, results):
        bad = [(name, w) for name, (ok, w) in results if not ok]
        line = f"criterion {number:2d}: {'PASS' if not bad else 'FAIL'}  {title}"
        if bad:
            line += f"  first failure: {bad[0][0]}: {bad[0][1]}"
        with capsys.disabled():
            print("\n" + line)
        assert not bad, line

    return _report


def per_example(fn, examples=EXAMPLES, **kw):
    return [(str(e), fn(build_example(e), **kw)) for e in examples]


def test_c01_embedding_algebra_laws(report):
    report(1, "phi(ab) = phi(a)phi(b), phi(I) = I exactly, n_k <= 16, 100 pairs",
           per_example(checks.check_homomorphism, max_dim=16, pairs=100))


def test_c02_complete_isometry(report):
    report(2, "amplification 1-3 preserves norm within 1e-8, 20 samples",
           per_example(checks.check_isometry, max_dim=16, samples=20, levels=(1, 2, 3), tol=1e-8))


def test_c03_composition_vs_dense(report):
    report(3, "normal-form composites equal sequential dense action up to depth 6",
           per_example(checks.check_composition_oracle, depth=6)
           + per_example(checks.check_associativity, depth=6))


def test_c04_lemma(report):
    report(4, "generated dimension rank(p)^2 + rank(q)^2, n in 2..4, tol 1e-8",
           [("sweep", checks.check_lemma((2, 3, 4), tol=1e-8))])


def test_c05_interval_combinatorics(report):
    report(5, "n(n+1)/2 intervals, j+1 of rank n-j, n <= 12",
           [("sweep", checks.check_interval_counts(12))])


def test_c06_boundary_witness(report):
    report(6, "upper-right unit dies under every proper compression, 2 <= n <= 12",
           [("sweep", checks.check_boundary_witness(12))])


def test_c07_reach_identity(report):
    report(7, "every node reaches an identity node within horizon 6",
           per_example(checks.check_reach_identity, REACH_EXAMPLES, horizon=6))


def test_c08_compact_dichotomy(report):
    report(8, "no_compacts for G, contains_finite_rank(1) otherwise, probe 12",
           [(str(e), checks.check_compacts(e, probe=12)) for e in EXAMPLES])


def test_c09_invariant_counts(report):
    ids = [ExampleId("A", n, i) for n in range(1, 5) for i in range(1, n + 1)]
    report(9, "A(n,i) has i+1 invariant projections in its image, n <= 4",
           [(str(e), checks.check_invariant_count(e)) for e in ids])


def test_c10_substring_and_commuting(report):
    depths = range(2, 7)
    report(10, "blocks never move and rho_k = rho_{k+1} o phi_k, depths 2-6",
           per_example(checks.check_substring_stability, depths=depths)
           + per_example(checks.check_commuting_diagram, depths=depths))


def test_c11_weak_density(report):
    report(11, "50 window-data instances reproduced exactly by density_preimage",
           per_example(checks.check_density, instances=50))


def test_c12_regularity(report):
    report(12, "matrix units map to sums of matrix units",
           per_example(checks.check_regular, max_dim=16))


def test_c13_schur_cocycle(report):
    report(13, "100 coboundaries accepted, 100 single-entry perturbations rejected",
           [("random", checks.check_schur(count=100))])
