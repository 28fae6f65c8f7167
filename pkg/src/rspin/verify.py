"""Property suites: every identity the library relies on, swept over windows.

Each suite enumerates a finite window of parameters, evaluates an identity
on both sides with exact arithmetic, and reports mismatches. Nothing is
sampled and nothing is approximate; a suite passes exactly when its failure
list is empty.

Default window bounds (r <= 6, n <= 5, sum(|k|) <= 8) keep the full run in
the seconds-to-minutes range; every bound is a parameter.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .core import (
    DR1Bracket,
    Genus0Bracket,
    ReductionStalledError,
    ascending_multisets,
    format_rational,
    genus_of,
)
from .dr1 import (
    b_value,
    b_value_trr,
    closed_form,
    enumerate_brackets,
    relation1_instance,
    relation2_instance,
    relation3_check,
    solve_relational,
)
from .genus0 import bracket_window_sum, four_point, loop_sum, solve_bracket
from .store import CacheStore

__all__ = [
    "SuiteReport",
    "check_prop_loop",
    "check_relations",
    "check_oracle_equivalence",
    "check_axioms",
    "SUITES",
    "run_suite",
]


@dataclass
class SuiteReport:
    """Outcome of one suite: counts, failures and wall time.

    ``failures`` holds (case key, expected, got) triples; the values are
    kept as strings so non-numeric outcomes (a stalled reduction, a wrong
    status) can be reported through the same channel. Failures are sorted
    by case key, making reports deterministic for fixed bounds.
    """

    suite: str
    cases: int
    failures: List[Tuple[str, str, str]] = field(default_factory=list)
    elapsed_ms: int = 0

    def __post_init__(self) -> None:
        self.failures = sorted(self.failures, key=lambda f: f[0])

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_payload(self) -> dict:
        return {
            "suite": self.suite,
            "cases": self.cases,
            "failures": [
                {"key": key, "expected": expected, "got": got}
                for key, expected, got in self.failures
            ],
            "elapsed_ms": self.elapsed_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), indent=2, sort_keys=True)

    def summary_line(self) -> str:
        state = "pass" if self.passed else f"FAIL ({len(self.failures)} failures)"
        return f"{self.suite}: {self.cases} cases, {state}, {self.elapsed_ms} ms"


def _fmt(value) -> str:
    if isinstance(value, Fraction):
        return format_rational(value)
    return str(value)


def _elapsed_ms(t0: float) -> int:
    return int((time.perf_counter() - t0) * 1000)


def check_prop_loop(r_max: int, n_max: int, extended: bool = False) -> SuiteReport:
    """Window-sum identity: loop_sum against a brute-force bracket sum.

    For every r <= r_max and point count up to n_max, all valid (m, x)
    windows are enumerated and the closed formula is compared with the sum
    of solve_bracket values over the window. ``extended`` widens m from
    r - 2 up to r on windows with at least two spectator twists; the
    boundary m = r with exactly two spectators is where the formula is
    known to part ways with the actual sum, and this suite reports those
    windows as failures rather than skipping them.
    """
    t0 = time.perf_counter()
    cases = 0
    failures: List[Tuple[str, str, str]] = []
    cache = CacheStore()
    for r in range(2, r_max + 1):
        m_hi = r if extended else r - 2
        for m in range(0, m_hi + 1):
            for n_pt in range(3, n_max + 1):
                x_len = n_pt - 2
                if extended and m > r - 2 and x_len < 2:
                    continue
                total_x = x_len * r - m - 2
                for x in ascending_multisets(0, r - 2, x_len, total_x):
                    cases += 1
                    formula = loop_sum(r, m, x, extended=extended)
                    summed = bracket_window_sum(r, m, x, cache)
                    if formula != summed:
                        key = "loop:r={}:m={}:x={}".format(
                            r, m, ",".join(str(v) for v in x)
                        )
                        failures.append((key, _fmt(summed), _fmt(formula)))
    return SuiteReport("loop", cases, failures, _elapsed_ms(t0))


def _orientations(bracket: DR1Bracket):
    from .core import _sorted_dr1_entries

    flipped = _sorted_dr1_entries([(-k, a) for k, a in bracket.entries])
    if flipped == bracket.entries:
        return [bracket.entries]
    return [bracket.entries, flipped]


def check_relations(r_max: int, k_sum_max: int, n_max: int) -> SuiteReport:
    """Residuals of every relation instance vanish under the closed form.

    Every canonical bracket in the window anchors relation-1 instances at
    each distinct positive slot (in both orientations) and relation-2
    instances at each distinct zero slot; each instance's residual must be
    exactly zero. Relation-3 shaped brackets must evaluate to zero.
    """
    t0 = time.perf_counter()
    cases = 0
    failures: List[Tuple[str, str, str]] = []
    for r in range(2, r_max + 1):
        for br in enumerate_brackets(r, n_max, k_sum_max):
            if relation3_check(br):
                cases += 1
                got = closed_form(br).value
                if got != 0:
                    failures.append(
                        ("relation3:" + br.key, "0/1", _fmt(got))
                    )
            n = br.n
            for o_idx, pairs in enumerate(_orientations(br)):
                k_row = [kk for kk, _ in pairs]
                a_row = [aa for _, aa in pairs]
                zero_slots: Dict[int, int] = {}
                for i, kk in enumerate(k_row):
                    if kk == 0:
                        zero_slots.setdefault(a_row[i], i)
                seen = set()
                for i, kk in enumerate(k_row):
                    if kk < 1 or (kk, a_row[i]) in seen:
                        continue
                    seen.add((kk, a_row[i]))
                    rest = [j for j in range(n) if j != i]
                    inst = relation1_instance(
                        r,
                        [k_row[j] for j in [i] + rest],
                        [a_row[j] for j in [i] + rest],
                    )
                    cases += 1
                    resid = inst.residual_closed()
                    if resid != 0:
                        key = "relation1:{}:orient={}:slot={}".format(br.key, o_idx, i)
                        failures.append((key, "0/1", _fmt(resid)))
                    for z in zero_slots.values():
                        z_order = [i, z] + [j for j in rest if j != z]
                        inst2 = relation2_instance(
                            r,
                            [k_row[j] for j in z_order],
                            [a_row[j] for j in z_order],
                        )
                        cases += 1
                        resid2 = inst2.residual_closed()
                        if resid2 != 0:
                            key = "relation2:{}:orient={}:slot={}:zero={}".format(
                                br.key, o_idx, i, z
                            )
                            failures.append((key, "0/1", _fmt(resid2)))
    return SuiteReport("relations", cases, failures, _elapsed_ms(t0))


def check_oracle_equivalence(r_max: int, k_sum_max: int, n_max: int) -> SuiteReport:
    """Relational solving agrees with the closed form on the whole window.

    Uses a fresh relational cache so repeated runs are independent. A
    stalled reduction counts as a failure with got = "reduction-stalled".
    """
    t0 = time.perf_counter()
    cases = 0
    failures: List[Tuple[str, str, str]] = []
    cache = CacheStore()
    for r in range(2, r_max + 1):
        for br in enumerate_brackets(r, n_max, k_sum_max):
            cases += 1
            want = closed_form(br)
            try:
                got = solve_relational(br, cache)
            except ReductionStalledError:
                failures.append((br.key, _fmt(want.value), "reduction-stalled"))
                continue
            if got.value != want.value:
                failures.append((br.key, _fmt(want.value), _fmt(got.value)))
            elif got.status != want.status:
                failures.append((br.key, want.status, got.status))
    return SuiteReport("oracle", cases, failures, _elapsed_ms(t0))


def check_axioms(r_max: int, n_max: int) -> SuiteReport:
    """Vanishing rules and bookkeeping consistency across evaluators.

    Checks, per r up to r_max and point counts up to n_max:
    - genus-0 brackets carrying a twist r - 1 evaluate to zero;
    - genus-0 brackets with >= 4 points and a zero twist evaluate to zero,
      and at exactly 4 points the min formula agrees with that rule;
    - genus_of reports 0 on genus-0 twist rows and 1 on one-point-plus-
      spectators genus-1 rows;
    - b_value and b_value_trr agree, and both closed_form and
      solve_relational vanish on genus-1 rows carrying a twist r - 1.
    """
    t0 = time.perf_counter()
    cases = 0
    failures: List[Tuple[str, str, str]] = []
    for r in range(2, r_max + 1):
        for n in range(3, n_max + 1):
            total = (n - 2) * r - 2
            if total < 0:
                continue
            for a in ascending_multisets(0, r - 1, n, total):
                br = Genus0Bracket(r, a)
                cases += 1
                g = genus_of(r, [(0, ai) for ai in a])
                if g != 0:
                    failures.append(("genus:" + br.key, "0", str(g)))
                if r - 1 in a:
                    cases += 1
                    got = solve_bracket(r, a)
                    if got.value != 0 or got.status != "vanishing-axiom-zero":
                        failures.append(
                            ("vanish:" + br.key, "0/1", _fmt(got.value))
                        )
                elif 0 in a and n >= 4:
                    cases += 1
                    got = solve_bracket(r, a)
                    if got.value != 0:
                        failures.append(
                            ("zero-entry:" + br.key, "0/1", _fmt(got.value))
                        )
                    if n == 4:
                        cases += 1
                        direct = four_point(r, *a)
                        if direct.value != 0:
                            failures.append(
                                ("zero-entry-formula:" + br.key, "0/1", _fmt(direct.value))
                            )
        for n in range(1, n_max + 1):
            total = (n - 1) * r
            if total > n * (r - 1):
                continue
            for a in ascending_multisets(0, r - 1, n, total):
                cases += 1
                direct = b_value(r, a)
                via_trr = b_value_trr(r, a)
                if direct != via_trr:
                    key = "b:r={}:a={}".format(r, ",".join(str(v) for v in a))
                    failures.append((key, _fmt(direct), _fmt(via_trr)))
                cases += 1
                rows = [(1, a[0])] + [(0, ai) for ai in a[1:]]
                g = genus_of(r, rows)
                if g != 1:
                    key = "genus-b:r={}:a={}".format(r, ",".join(str(v) for v in a))
                    failures.append((key, "1", str(g)))
                if r - 1 in a and n >= 2:
                    br1 = DR1Bracket(r, [(2, a[0]), (-2, a[1])] + [(0, ai) for ai in a[2:]])
                    cases += 1
                    got_c = closed_form(br1)
                    got_r = solve_relational(br1, CacheStore())
                    if got_c.value != 0 or got_r.value != 0:
                        failures.append(
                            ("vanish-dr1:" + br1.key, "0/1", _fmt(got_c.value) + "|" + _fmt(got_r.value))
                        )
    return SuiteReport("axioms", cases, failures, _elapsed_ms(t0))


SUITES = ("loop", "relations", "oracle", "axioms")


def run_suite(
    name: str,
    r_max: int = 6,
    n_max: int = 5,
    k_sum_max: int = 8,
    extended: bool = False,
) -> List[SuiteReport]:
    """Run one named suite, or all of them, with shared window bounds."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}")
    reports = []
    for suite in names:
        if suite == "loop":
            reports.append(check_prop_loop(r_max, n_max, extended=extended))
        elif suite == "relations":
            reports.append(check_relations(r_max, k_sum_max, n_max))
        elif suite == "oracle":
            reports.append(check_oracle_equivalence(r_max, k_sum_max, n_max))
        elif suite == "axioms":
            reports.append(check_axioms(r_max, n_max))
    return reports
