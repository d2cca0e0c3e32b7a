"""End-to-end verification run behind ``complim verify``."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Sequence, Union

from . import checks
from .gallery import ExampleId, all_examples, build_example, invariant_projection_count
from .system import compact_classification

log = logging.getLogger(__name__)

# COMPLIM_MAX_DEPTH caps the probe depth, COMPLIM_TRIALS the random sample sizes.
DEFAULT_DEPTH = 6


def _record(name: str, scope: str, result: checks.Result, **extra) -> dict:
    ok, witness = result
    rec = {"check_name": name, "scope": scope, "status": "pass" if ok else "fail"}
    if witness:
        rec["witness"] = witness
    rec.update(extra)
    return rec


def _guard(name: str, scope: str, fn, *args, **kwargs) -> dict:
    try:
        return _record(name, scope, fn(*args, **kwargs))
    except Exception as exc:  # a crashing check is a failing check
        log.exception("check %s on %s crashed", name, scope)
        return _record(name, scope, (False, f"{type(exc).__name__}: {exc}"))


def _example_records(eid: ExampleId, depth: int, trials: int) -> list[dict]:
    scope = str(eid)
    spec = build_example(eid)
    out = [
        _guard("homomorphism", scope, checks.check_homomorphism, spec, pairs=trials),
        _guard("regularity", scope, checks.check_regular, spec),
        _guard("left_inverse", scope, checks.check_left_inverse, spec),
        _guard("isometry", scope, checks.check_isometry, spec, samples=max(trials // 5, 2)),
        _guard("composition_oracle", scope, checks.check_composition_oracle, spec, depth),
        _guard("associativity", scope, checks.check_associativity, spec, depth),
        _guard("substring_stability", scope, checks.check_substring_stability, spec, range(2, depth + 1)),
        _guard("commuting_diagram", scope, checks.check_commuting_diagram, spec, range(2, depth + 1)),
        _guard("weak_density", scope, checks.check_density, spec, instances=trials // 2),
        _guard("level_structures", scope, checks.check_level_structures, spec, min(4, depth), depth),
        _guard("bratteli_oracle", scope, checks.check_bratteli_oracle, spec, min(4, depth), depth),
        _guard("reach_identity", scope, checks.check_reach_identity, spec, depth),
        _guard("gallery", scope, checks.check_gallery, eid, (1, 2), depth),
    ]
    probe = max(depth, 12)
    try:
        cls = compact_classification(spec, probe)
        out.append(_record("compacts", scope, checks.check_compacts(eid, probe), classification=str(cls)))
    except Exception as exc:
        out.append(_record("compacts", scope, (False, f"{type(exc).__name__}: {exc}")))
    if eid.tag in "AC":
        try:
            count = invariant_projection_count(eid)
            out.append(_record("invariant_count", scope, checks.check_invariant_count(eid), count=count))
        except Exception as exc:
            out.append(_record("invariant_count", scope, (False, f"{type(exc).__name__}: {exc}")))
    return out


def run_suite(
    scope: Union[str, Sequence[ExampleId]] = "all",
    depth: Optional[int] = None,
    trials: Optional[int] = None,
    parallel: bool = True,
) -> tuple[int, dict]:
    """Run the battery; returns ``(exit_status, report)``; status 0 iff everything passed."""
    depth = min(depth or DEFAULT_DEPTH, checks.env_int("COMPLIM_MAX_DEPTH", 12))
    trials = trials or checks.env_int("COMPLIM_TRIALS", 100)
    examples: Iterable[ExampleId] = all_examples() if scope == "all" else scope
    examples = list(examples)
    records: list[dict] = []
    if scope == "all":
        records += [
            _guard("interval_counts", "global", checks.check_interval_counts),
            _guard("boundary_witness", "global", checks.check_boundary_witness),
            _guard("lemma_sweep", "global", checks.check_lemma),
            _guard("schur_cocycle", "global", checks.check_schur, trials),
        ]
    if parallel and len(examples) > 1:
        with ThreadPoolExecutor() as pool:
            for recs in pool.map(lambda e: _example_records(e, depth, trials), examples):
                records += recs
    else:
        for e in examples:
            records += _example_records(e, depth, trials)
    records.sort(key=lambda r: (r["scope"], r["check_name"]))
    failed = [r for r in records if r["status"] != "pass"]
    report = {
        "depth": depth,
        "trials": trials,
        "scope": [str(e) for e in examples] if scope != "all" else "all",
        "records": records,
        "passed": len(records) - len(failed),
        "failed": len(failed),
    }
    return (1 if failed else 0), report
