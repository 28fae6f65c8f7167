"""Genus-1 double-ramification brackets: closed form and relation solving.

A bracket pairs an integer row ``k`` summing to zero with a twist row ``a``.
The one-point quantity

    B(r, a) = (1/24) * ((n-1)! / r^(n-1)) * prod(r - 1 - a_i)

shows up as the inhomogeneous term of every relation, and the full bracket
has the closed form ``(sum(k_i^2)/2 - 1) * B``.

:func:`solve_relational` recomputes bracket values without ever touching
that closed form. Its base cases are the sign pattern ``(+1, -1, 0, ..)``
(which forces the value zero) and ``B`` obtained through
:func:`b_value_trr`, a window sum over genus-0 data rather than the product
formula. Everything else reduces through three rewriting moves extracted
from the linear relations below; each move strictly shrinks either the
number of nonzero ``k`` entries or the smallest nonzero magnitude, so the
recursion terminates. A cycle guard plus a bounded-window linear solve
(:func:`RelationInstance` rows fed to exact elimination) backs up the
rewriting in case a reduction ever fails to make progress.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .core import (
    STATUS_DIMENSION_ZERO,
    STATUS_OK,
    STATUS_VANISHING_ZERO,
    DR1Bracket,
    EvalResult,
    GradingError,
    ReductionStalledError,
    StructureError,
    _check_r,
    _check_twists,
    ascending_multisets,
    dr1_selection,
)
from .elimination import solve_exact
from .genus0 import loop_sum
from .store import CacheStore

__all__ = [
    "b_value",
    "b_value_trr",
    "closed_form",
    "RelationInstance",
    "relation1_instance",
    "relation2_instance",
    "relation3_check",
    "solve_relational",
    "enumerate_brackets",
]

_RELATIONAL_CACHE = CacheStore()


def b_value(r: int, a: Sequence[int]) -> Fraction:
    """Product formula for the genus-1 one-point coefficient B(r, a).

    Rows violating the genus-1 selection rule ``sum(a) = (n-1)*r`` carry no
    bracket and the coefficient is taken to be 0. A twist equal to ``r - 1``
    kills the product through its ``r - 1 - a_i`` factor.
    """
    _check_r(r)
    a = tuple(a)
    _check_twists(r, a)
    n = len(a)
    if n < 1:
        raise GradingError("b_value needs at least one twist")
    if not dr1_selection(r, a):
        return Fraction(0)
    prod = 1
    for ai in a:
        prod *= r - 1 - ai
    return Fraction(factorial(n - 1) * prod, 24 * r ** (n - 1))


def b_value_trr(r: int, a: Sequence[int]) -> Fraction:
    """B(r, a) recomputed through the genus-0 window sum.

    The genus-1 one-point class restricts to a sum of genus-0 brackets over
    a window of boundary twists; :func:`rspin.genus0.loop_sum` evaluates
    that window in closed form at ``m = r - 2``, and dividing by 24 gives B.
    This route never consults the product formula in :func:`b_value`, so
    comparing the two is a real cross-check.
    """
    _check_r(r)
    a = tuple(a)
    _check_twists(r, a)
    n = len(a)
    if n < 1:
        raise GradingError("b_value_trr needs at least one twist")
    if not dr1_selection(r, a):
        return Fraction(0)
    if any(ai == r - 1 for ai in a):
        # Every bracket in the window carries the twist r - 1 and vanishes.
        # loop_sum cannot represent that window (its x entries stop at
        # r - 2), so short-circuit rather than call it out of range.
        return Fraction(0)
    return loop_sum(r, r - 2, a) / 24


def closed_form(bracket: DR1Bracket) -> EvalResult:
    """Evaluate a bracket as ``(sum(k_i^2)/2 - 1) * B(r, a)``."""
    if not bracket.selection_ok:
        return EvalResult(Fraction(0), STATUS_DIMENSION_ZERO, ("selection",))
    if any(ai == bracket.r - 1 for ai in bracket.a_row):
        return EvalResult(Fraction(0), STATUS_VANISHING_ZERO, ("vanishing-axiom",))
    coeff = Fraction(sum(k * k for k in bracket.k_row), 2) - 1
    value = coeff * b_value(bracket.r, bracket.a_row)
    return EvalResult(value, STATUS_OK, ("closed-form",))


@dataclass(frozen=True)
class RelationInstance:
    """One linear relation ``b_coefficient * B(context) = sum(terms)``.

    ``terms`` maps canonical bracket keys to rational coefficients; repeated
    keys produced while assembling an instance accumulate. ``context`` is the
    ``(r, sorted-a-row)`` pair fixing which B appears on the left.
    """

    kind: str
    b_coefficient: Fraction
    terms: Dict[str, Fraction]
    context: Tuple[int, Tuple[int, ...]]

    def residual_closed(self) -> Fraction:
        """Left side minus right side with every bracket evaluated closed-form.

        Zero for every structurally valid instance; the verification suite
        sweeps this over windows of contexts.
        """
        from .core import parse_key

        r, a_sorted = self.context
        total = self.b_coefficient * b_value(r, a_sorted)
        for key, coeff in self.terms.items():
            total -= coeff * closed_form(parse_key(key)).value
        return total


def _term_key(r: int, k_row: Sequence[int], a_row: Sequence[int]) -> str:
    return DR1Bracket(r, zip(k_row, a_row)).key


def _add_term(terms: Dict[str, Fraction], key: str, coeff: Fraction) -> None:
    new = terms.get(key, Fraction(0)) + coeff
    if new == 0:
        terms.pop(key, None)
    else:
        terms[key] = new


def _check_rows(r: int, k: Sequence[int], a: Sequence[int]) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    _check_r(r)
    k = tuple(int(v) for v in k)
    a = tuple(a)
    if len(k) != len(a):
        raise StructureError("k and a rows differ in length")
    _check_twists(r, a)
    if sum(k) != 0:
        raise StructureError("k row must sum to zero")
    if all(v == 0 for v in k):
        raise StructureError("k row must contain a nonzero entry")
    return k, a


def relation1_instance(r: int, k: Sequence[int], a: Sequence[int]) -> RelationInstance:
    """String-equation relation anchored at the designated entry ``k[0]``.

    With ``k[0] >= 1`` designated, ``n_+`` / ``n_-`` counting the positive
    and negative entries, and tilde values the magnitudes of the negative
    ones, the relation reads::

        (k[0]+1)(n_+ + n_- + 1) B
            = -(k[0] + n_+ + n_- + 1) <k | a>
              - sum over other positives i of (k_i - 1) <.. k[0]+1 .. k_i-1 ..>
              + sum over negatives j of (|k_j| + 1) <.. k[0]+1 .. k_j-1 ..>

    The twist row never moves; only the integer row is edited.
    """
    k, a = _check_rows(r, k, a)
    if k[0] < 1:
        raise StructureError("designated entry not positive")
    n_plus = sum(1 for v in k if v > 0)
    n_minus = sum(1 for v in k if v < 0)
    c0 = Fraction(k[0] + n_plus + n_minus + 1)
    b_coeff = Fraction((k[0] + 1) * (n_plus + n_minus + 1))
    terms: Dict[str, Fraction] = {}
    _add_term(terms, _term_key(r, k, a), -c0)
    for i in range(1, len(k)):
        if k[i] > 0:
            coeff = Fraction(k[i] - 1)
            if coeff == 0:
                continue
            edited = list(k)
            edited[0] += 1
            edited[i] -= 1
            _add_term(terms, _term_key(r, edited, a), -coeff)
    for j in range(len(k)):
        if k[j] < 0:
            coeff = Fraction(-k[j] + 1)
            edited = list(k)
            edited[0] += 1
            edited[j] -= 1
            _add_term(terms, _term_key(r, edited, a), coeff)
    return RelationInstance("relation1", b_coeff, terms, (r, tuple(sorted(a))))


def relation2_instance(r: int, k: Sequence[int], a: Sequence[int]) -> RelationInstance:
    """Zero-slot relation: trade one ``k = 0`` entry for a ``-1`` entry.

    Requires ``k[0] >= 1`` designated and at least one zero entry. The first
    zero slot (in the order given) becomes ``-1`` while the designated entry
    is bumped to ``k[0] + 1``::

        (k[0] + 1) B = -<k | a> + <.. k[0]+1 .. -1 ..| a>
    """
    k, a = _check_rows(r, k, a)
    if k[0] < 1:
        raise StructureError("designated entry not positive")
    zero_slots = [i for i, v in enumerate(k) if v == 0]
    if not zero_slots:
        raise StructureError("relation needs a zero entry (n_0 = 0)")
    b_coeff = Fraction(k[0] + 1)
    edited = list(k)
    edited[0] += 1
    edited[zero_slots[0]] = -1
    terms: Dict[str, Fraction] = {}
    _add_term(terms, _term_key(r, k, a), Fraction(-1))
    _add_term(terms, _term_key(r, edited, a), Fraction(1))
    return RelationInstance("relation2", b_coeff, terms, (r, tuple(sorted(a))))


def relation3_check(bracket: DR1Bracket) -> bool:
    """True when the integer row is one ``+1``, one ``-1`` and zeros.

    Such brackets vanish outright; this is the terminal base case of the
    relational solver.
    """
    return (
        bracket.n_plus == 1
        and bracket.n_minus == 1
        and max(bracket.k_row) == 1
        and min(bracket.k_row) == -1
    )


def _flipped_sorted(bracket: DR1Bracket) -> Tuple[Tuple[int, int], ...]:
    """The sign-flipped entry row, re-sorted but not re-oriented."""
    from .core import _sorted_dr1_entries

    return _sorted_dr1_entries([(-kk, aa) for kk, aa in bracket.entries])


class _StallSignal(Exception):
    """Internal marker: rewriting revisited a key and must fall back."""


def _solve_from_instance(
    inst: RelationInstance,
    target_key: str,
    b: Fraction,
    value_of,
) -> Fraction:
    """Solve one relation instance for the coefficient of ``target_key``."""
    terms = dict(inst.terms)
    target_coeff = terms.pop(target_key, Fraction(0))
    if target_coeff == 0:
        raise _StallSignal(target_key)
    rhs = inst.b_coefficient * b
    for key, coeff in terms.items():
        rhs -= coeff * value_of(key)
    return rhs / target_coeff


def _relational_value(bracket: DR1Bracket, cache: CacheStore, visiting: Set[str]) -> Tuple[Fraction, str]:
    key = bracket.key
    hit = cache.get(key)
    if hit is not None:
        return hit, "cache"
    if relation3_check(bracket):
        cache.put(key, Fraction(0))
        return Fraction(0), "relation-3"
    if key in visiting:
        raise _StallSignal(key)
    visiting.add(key)
    try:
        value, rule = _reduce_once(bracket, cache, visiting)
    finally:
        visiting.discard(key)
    cache.put(key, value)
    return value, rule


def _child_value(r: int, pairs: Sequence[Tuple[int, int]], cache: CacheStore, visiting: Set[str]) -> Fraction:
    child = DR1Bracket(r, pairs)
    return _relational_value(child, cache, visiting)[0]


def _reduce_once(bracket: DR1Bracket, cache: CacheStore, visiting: Set[str]) -> Tuple[Fraction, str]:
    r = bracket.r
    b = b_value_trr(r, bracket.a_row)
    mags = [abs(kk) for kk, _ in bracket.entries if kk != 0]
    if max(mags) == 1:
        # All nonzero entries are +-1 and the +1/-1 counts match; the pure
        # (+1, -1) pattern was already peeled off as relation 3, so at least
        # two of each remain.
        return _case_all_units(bracket, b, cache, visiting), "case-2"
    if min(mags) == 1:
        return _case_unit_present(bracket, b, cache, visiting), "case-1"
    return _case_all_large(bracket, b, cache, visiting), "case-3"


def _case_unit_present(bracket: DR1Bracket, b: Fraction, cache: CacheStore, visiting: Set[str]) -> Fraction:
    """Some entry has magnitude 1 and some other entry magnitude >= 2.

    Orient so a ``-1`` entry and a positive entry ``p >= 2`` coexist, then
    trade the ``-1`` for a zero while lowering ``p``:

        <.., p, .., -1, ..> = p * B + <.., p-1, .., 0, ..>
    """

    def qualifies(entries: Sequence[Tuple[int, int]]) -> bool:
        has_neg_one = any(kk == -1 for kk, _ in entries)
        has_big_pos = any(kk >= 2 for kk, _ in entries)
        return has_neg_one and has_big_pos

    working = bracket.entries
    if not qualifies(working):
        working = _flipped_sorted(bracket)
        if not qualifies(working):
            # Mixed-magnitude rows always admit one orientation or the
            # other; reaching here means the classification is off.
            raise _StallSignal(bracket.key)
    pairs = list(working)
    pos_idx = max(range(len(pairs)), key=lambda i: pairs[i][0])
    neg_idx = next(i for i, (kk, _) in enumerate(pairs) if kk == -1)
    p = pairs[pos_idx][0]
    pairs[pos_idx] = (p - 1, pairs[pos_idx][1])
    pairs[neg_idx] = (0, pairs[neg_idx][1])
    return p * b + _child_value(bracket.r, pairs, cache, visiting)


def _case_all_units(bracket: DR1Bracket, b: Fraction, cache: CacheStore, visiting: Set[str]) -> Fraction:
    """Every nonzero entry is +-1 with at least two of each sign.

    The relation anchored at one of the ``+1`` entries involves the bracket
    itself and copies where that entry becomes ``2`` and one ``-1`` becomes
    ``-2``; those children fall into the mixed-magnitude case.
    """
    pairs = list(bracket.entries)
    k_row = [kk for kk, _ in pairs]
    a_row = [aa for _, aa in pairs]
    anchor = k_row.index(1)
    order = [anchor] + [i for i in range(len(pairs)) if i != anchor]
    inst = relation1_instance(bracket.r, [k_row[i] for i in order], [a_row[i] for i in order])
    return _solve_from_instance(
        inst,
        bracket.key,
        b,
        lambda key: _keyed_value(key, cache, visiting),
    )


def _case_all_large(bracket: DR1Bracket, b: Fraction, cache: CacheStore, visiting: Set[str]) -> Fraction:
    """Every nonzero entry has magnitude >= 2.

    Orient so the globally smallest magnitude sits on the negative side,
    anchor the relation at the largest positive entry, and solve for the
    term where the minimal negative entry deepens by one. Reversed, that
    expresses the bracket through rows whose smallest magnitude is strictly
    smaller, which is what drives termination.
    """
    working = list(bracket.entries)
    min_pos = min(kk for kk, _ in working if kk > 0)
    min_neg = min(-kk for kk, _ in working if kk < 0)
    if min_pos < min_neg:
        working = list(_flipped_sorted(bracket))
    pairs = list(working)
    k_row = [kk for kk, _ in pairs]
    a_row = [aa for _, aa in pairs]
    # Target child: anchor bumped up, shallowest negative deepened. Undoing
    # that edit recovers the bracket itself from the instance context.
    anchor = max(range(len(pairs)), key=lambda i: k_row[i])
    neg_candidates = [i for i, kk in enumerate(k_row) if kk < 0]
    shallow = min(neg_candidates, key=lambda i: -k_row[i])
    context_k = list(k_row)
    context_k[anchor] -= 1
    context_k[shallow] += 1
    if context_k[anchor] < 1:
        raise _StallSignal(bracket.key)
    order = [anchor] + [i for i in range(len(pairs)) if i != anchor]
    inst = relation1_instance(
        bracket.r,
        [context_k[i] for i in order],
        [a_row[i] for i in order],
    )
    return _solve_from_instance(
        inst,
        bracket.key,
        b,
        lambda key: _keyed_value(key, cache, visiting),
    )


def _keyed_value(key: str, cache: CacheStore, visiting: Set[str]) -> Fraction:
    from .core import parse_key

    return _relational_value(parse_key(key), cache, visiting)[0]


def _k_profiles(n: int, s_max: int):
    """Yield integer rows of length n, summing to zero, with sum(|k|) <= s_max.

    Rows come out as (positives descending, zeros, negatives ascending in
    magnitude is not guaranteed; canonicalization handles ordering). The
    all-zero row is excluded.
    """

    def partitions(total: int, max_part: int, max_len: int):
        if total == 0:
            yield ()
            return
        if max_len == 0:
            return
        for first in range(min(total, max_part), 0, -1):
            for rest in partitions(total - first, first, max_len - 1):
                yield (first,) + rest

    for s in range(1, s_max // 2 + 1):
        for pos in partitions(s, s, n - 1):
            for neg in partitions(s, s, n - len(pos)):
                zeros = n - len(pos) - len(neg)
                yield list(pos) + [0] * zeros + [-q for q in neg]


def enumerate_brackets(r: int, n_max: int, k_sum_max: int) -> List[DR1Bracket]:
    """All canonical brackets with n <= n_max insertions and sum(|k|) <= k_sum_max.

    Twist rows run over the genus-1 selection rule ``sum(a) = (n-1) * r``
    with every twist in [0, r-1]. Results are deduplicated by canonical key
    and sorted by it.
    """
    _check_r(r)
    found: Dict[str, DR1Bracket] = {}
    for n in range(2, n_max + 1):
        total = (n - 1) * r
        if total > n * (r - 1):
            continue
        for a_ms in ascending_multisets(0, r - 1, n, total):
            a_perms = sorted(set(permutations(a_ms)))
            for k_row in _k_profiles(n, k_sum_max):
                for a_row in a_perms:
                    br = DR1Bracket(r, zip(k_row, a_row))
                    found.setdefault(br.key, br)
    return [found[key] for key in sorted(found)]


def _window_solve(bracket: DR1Bracket, cache: CacheStore) -> Optional[Fraction]:
    """Assemble every relation over a bounded key window and eliminate.

    The window fixes (r, n, twist multiset) and caps ``sum(|k|)`` a little
    above the target's, generates relation-1 rows for each admissible anchor,
    relation-2 rows for each zero slot, and the relation-3 vanishing rows,
    then solves the whole linear system exactly. Returns None when the target
    stays undetermined.
    """
    r = bracket.r
    n = bracket.n
    a_ms = tuple(sorted(bracket.a_row))
    s_target = sum(abs(kk) for kk in bracket.k_row)
    s_max = s_target + 4
    b = b_value_trr(r, a_ms)

    a_perms = sorted(set(permutations(a_ms)))
    unknown: Dict[str, DR1Bracket] = {}
    for k_row in _k_profiles(n, s_max):
        for a_row in a_perms:
            br = DR1Bracket(r, zip(k_row, a_row))
            unknown.setdefault(br.key, br)

    equations: List[Tuple[Dict[str, Fraction], Fraction]] = []
    for key in sorted(unknown):
        br = unknown[key]
        if relation3_check(br):
            equations.append(({key: Fraction(1)}, Fraction(0)))
        s_here = sum(abs(kk) for kk in br.k_row)
        if s_here + 2 > s_max:
            # Relations anchored here reference rows outside the window.
            continue
        # Values are flip-invariant but relation instances are not, so both
        # orientations contribute equations.
        orientations = [br.entries]
        flipped = _flipped_sorted(br)
        if flipped != br.entries:
            orientations.append(flipped)
        for pairs in orientations:
            k_row = [kk for kk, _ in pairs]
            a_row = [aa for _, aa in pairs]
            zero_slots: Dict[int, int] = {}
            for i, kk in enumerate(k_row):
                if kk == 0:
                    zero_slots.setdefault(a_row[i], i)
            seen_anchors = set()
            for i, kk in enumerate(k_row):
                if kk < 1 or (kk, a_row[i]) in seen_anchors:
                    continue
                seen_anchors.add((kk, a_row[i]))
                rest = [j for j in range(n) if j != i]
                order = [i] + rest
                k_ord = [k_row[j] for j in order]
                a_ord = [a_row[j] for j in order]
                inst = relation1_instance(r, k_ord, a_ord)
                equations.append((dict(inst.terms), inst.b_coefficient * b))
                for z in zero_slots.values():
                    z_order = [i, z] + [j for j in rest if j != z]
                    inst2 = relation2_instance(
                        r,
                        [k_row[j] for j in z_order],
                        [a_row[j] for j in z_order],
                    )
                    equations.append((dict(inst2.terms), inst2.b_coefficient * b))
    values, _free = solve_exact(sorted(unknown), equations)
    if bracket.key in values:
        for key, val in values.items():
            if cache.get(key) is None:
                cache.put(key, val)
        return values[bracket.key]
    return None


def solve_relational(bracket: DR1Bracket, cache: Optional[CacheStore] = None) -> EvalResult:
    """Evaluate a bracket purely through the linear relations.

    The value is computed without reference to :func:`closed_form`: base
    cases are the relation-3 vanishing pattern and ``B`` via
    :func:`b_value_trr`, and composite brackets reduce by the three
    rewriting moves. If rewriting ever revisits a key or fails to anchor,
    a bounded-window elimination over all relation instances takes over;
    if that also leaves the value undetermined a
    :class:`rspin.core.ReductionStalledError` is raised.
    """
    if cache is None:
        cache = _RELATIONAL_CACHE
    if not bracket.selection_ok:
        return EvalResult(Fraction(0), STATUS_DIMENSION_ZERO, ("selection",))
    if any(ai == bracket.r - 1 for ai in bracket.a_row):
        return EvalResult(Fraction(0), STATUS_VANISHING_ZERO, ("vanishing-axiom",))
    try:
        value, rule = _relational_value(bracket, cache, set())
        return EvalResult(value, STATUS_OK, (rule,))
    except _StallSignal:
        fallback = _window_solve(bracket, cache)
        if fallback is None:
            raise ReductionStalledError(
                f"reduction-stalled: {bracket.key} not determined by rewriting "
                "or by window elimination"
            )
        return EvalResult(fallback, STATUS_OK, ("window-elimination",))
