"""Property suites: green windows, known-divergent windows, determinism."""

from __future__ import annotations

import json

import pytest

from rspin.verify import (
    SuiteReport,
    check_axioms,
    check_oracle_equivalence,
    check_prop_loop,
    check_relations,
    run_suite,
)


def test_loop_suite_passes_classic_range():
    report = check_prop_loop(5, 4)
    assert report.suite == "loop"
    assert report.passed
    assert report.cases >= 10


def test_loop_suite_r2_passes():
    report = check_prop_loop(2, 4)
    assert report.passed


def test_loop_suite_extended_fails_exactly_on_the_boundary():
    """Extended range m <= r: the failures are precisely the windows with
    m = r and two spectator twists, for every r in the window."""
    report = check_prop_loop(6, 5, extended=True)
    assert not report.passed
    got = {key for key, _, _ in report.failures}
    want = set()
    for r in range(2, 7):
        total_x = 2 * r - r - 2
        for x1 in range(0, r - 1):
            x2 = total_x - x1
            if x1 <= x2 <= r - 2:
                want.add(f"loop:r={r}:m={r}:x={x1},{x2}")
    assert got == want
    # everything else in the extended range agrees
    assert len(report.failures) == len(want)


def test_relations_suite_passes():
    report = check_relations(5, 6, 4)
    assert report.passed
    assert report.cases > 100


def test_oracle_suite_passes():
    report = check_oracle_equivalence(5, 6, 4)
    assert report.passed
    assert report.cases > 50


def test_axioms_suite_passes():
    report = check_axioms(5, 4)
    assert report.passed
    assert report.cases > 30


def test_reports_are_deterministic():
    a = check_prop_loop(5, 5, extended=True)
    b = check_prop_loop(5, 5, extended=True)
    assert a.cases == b.cases
    assert a.failures == b.failures


def test_report_json_schema():
    report = check_prop_loop(4, 4, extended=True)
    payload = json.loads(report.to_json())
    assert set(payload) == {"suite", "cases", "failures", "elapsed_ms"}
    for failure in payload["failures"]:
        assert set(failure) == {"key", "expected", "got"}
    keys = [f["key"] for f in payload["failures"]]
    assert keys == sorted(keys)


def test_failures_sorted_by_key():
    report = SuiteReport("demo", 3, [("b", "1", "2"), ("a", "1", "3")])
    assert [key for key, _, _ in report.failures] == ["a", "b"]
    assert not report.passed


def test_run_suite_dispatch():
    reports = run_suite("all", r_max=4, n_max=4, k_sum_max=4)
    assert [rep.suite for rep in reports] == ["loop", "relations", "oracle", "axioms"]
    assert all(rep.passed for rep in reports)
    single = run_suite("axioms", r_max=3, n_max=4)
    assert len(single) == 1 and single[0].suite == "axioms"
    with pytest.raises(ValueError):
        run_suite("nonsense")
