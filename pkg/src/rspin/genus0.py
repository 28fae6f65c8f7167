"""Genus-0 correlator evaluation: closed 3/4-point values and WDVV solving.

Small brackets have closed forms: any grading-valid 3-point bracket equals 1,
and a 4-point bracket equals ``(1/r) * min`` over the twists and their
reflections ``r - 1 - a_i``. Brackets with five or more insertions are not
given by a formula here; instead, associativity of the genus-0 theory yields
linear equations tying an n-point bracket to products of smaller ones, and
:func:`solve_bracket` assembles and solves that system exactly.

Two vanishing rules shortcut the solver and also prune the generated
equations: a twist equal to ``r - 1`` kills any bracket, and a twist equal
to ``0`` kills any bracket with at least four insertions.

:func:`loop_sum` evaluates the closed formula
``((n-1)!/r^(n-1)) * prod(r-1-x_i)`` for the window sum
``sum_{a+b=m} <a, b, x_1..x_n>``. The formula is exact for ``m <= r - 2``.
The ``extended`` flag admits ``m <= r`` for ``len(x) >= 2``; beware that at
exactly ``m = r`` with ``len(x) = 2`` the formula provably differs from the
actual bracket sum (see ``bracket_window_sum`` and the divergence tests),
so extended-range results there describe the formula, not the sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from .core import (
    STATUS_DIMENSION_ZERO,
    STATUS_OK,
    STATUS_VANISHING_ZERO,
    EvalResult,
    Genus0Bracket,
    GradingError,
    UnderdeterminedError,
    _check_r,
    _check_twists,
    ascending_multisets,
    genus0_selection,
)
from .elimination import solve_exact
from .store import CacheStore

__all__ = [
    "three_point",
    "four_point",
    "node_label",
    "loop_sum",
    "WdvvSystem",
    "wdvv_equations",
    "solve_bracket",
    "bracket_window_sum",
]

_DEFAULT_CACHE = CacheStore()


def three_point(r: int, a1: int, a2: int, a3: int) -> EvalResult:
    """Evaluate a 3-point bracket: 1 whenever the grading holds.

    Grading failures return 0 with ``dimension-mismatch-zero``. A twist of
    ``r - 1`` cannot coexist with a valid 3-point grading (the remaining
    twists would need a negative sum), but the axiom branch is kept so the
    precedence matches the other evaluators.
    """
    _check_r(r)
    a = _check_twists(r, (a1, a2, a3))
    if sum(a) != r - 2:
        return EvalResult(Fraction(0), STATUS_DIMENSION_ZERO, ("selection",))
    if any(x == r - 1 for x in a):
        return EvalResult(Fraction(0), STATUS_VANISHING_ZERO, ("vanishing-axiom",))
    return EvalResult(Fraction(1), STATUS_OK, ("three-point",))


def four_point(r: int, a1: int, a2: int, a3: int, a4: int) -> EvalResult:
    """Evaluate a 4-point bracket by the minimum-twist-distance formula.

    For ``sum a_i = 2r - 2`` the value is ``(1/r) * min`` over the multiset
    ``{a_1..a_4, r-1-a_1..r-1-a_4}``. A zero twist therefore gives value 0
    with status ``ok`` (the formula itself vanishes), while a twist of
    ``r - 1`` is reported as the vanishing axiom.
    """
    _check_r(r)
    a = _check_twists(r, (a1, a2, a3, a4))
    if sum(a) != 2 * r - 2:
        return EvalResult(Fraction(0), STATUS_DIMENSION_ZERO, ("selection",))
    if any(x == r - 1 for x in a):
        return EvalResult(Fraction(0), STATUS_VANISHING_ZERO, ("vanishing-axiom",))
    m = min(min(a), min(r - 1 - x for x in a))
    return EvalResult(Fraction(m, r), STATUS_OK, ("four-point",))


def node_label(r: int, a_subset: Sequence[int]) -> int:
    """Twist forced at a separating node by the twists on one side.

    The two node branches carry twists ``a'`` and ``a'' = r - 2 - a'``, and
    the side holding ``a_subset`` determines ``a'`` by the residue condition
    ``a' = -2 - sum(a_subset) (mod r)``. Always exists and is unique in
    ``[0, r-1]``.
    """
    _check_r(r)
    a = _check_twists(r, a_subset)
    return (-2 - sum(a)) % r


def loop_sum(r: int, m: int, x: Sequence[int], extended: bool = False) -> Fraction:
    """Closed formula ``((n-1)!/r^(n-1)) * prod(r-1-x_i)`` for a window sum.

    Parameters
    ----------
    r, m, x:
        Window data: the sum runs over twist pairs ``a + b = m`` in front of
        the fixed twists ``x``. Requires ``0 <= x_i <= r-2`` and the grading
        ``sum(x) = len(x)*r - m - 2``.
    extended:
        Classically ``m <= r - 2``. With ``extended=True`` the range
        ``m <= r`` is admitted for ``len(x) >= 2``; single-``x`` windows
        stay restricted because the count there is ``m + 1`` only while
        every twist pair stays in range.

    Raises
    ------
    GradingError
        On any precondition violation, including ``m`` out of the allowed
        range and a mismatched twist sum.
    """
    _check_r(r)
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise GradingError(f"window sum bound m={m!r} must be a non-negative integer")
    xs = _check_twists(r, x)
    n = len(xs)
    if n < 1:
        raise GradingError("loop_sum needs at least one fixed twist")
    if any(v > r - 2 for v in xs):
        raise GradingError(f"fixed twists must lie in [0, {r - 2}] for r={r}")
    if m > r - 2:
        if not extended:
            raise GradingError(f"m={m} exceeds r-2={r - 2}; pass extended=True for m <= r")
        if m > r:
            raise GradingError(f"m={m} exceeds the extended bound r={r}")
        if n < 2:
            raise GradingError("extended range requires at least two fixed twists")
    if sum(xs) != n * r - m - 2:
        raise GradingError(
            f"twist sum {sum(xs)} does not match n*r - m - 2 = {n * r - m - 2}"
        )
    value = Fraction(factorial(n - 1), r ** (n - 1))
    for v in xs:
        value *= r - 1 - v
    return value


@dataclass(frozen=True, eq=False)
class WdvvSystem:
    """Exact linear system for all unsolved n-point brackets at one (r, n).

    ``unknowns`` holds canonical keys in ascending order; that order is also
    the elimination pivot order. Each equation is ``(coeffs, constant)``
    meaning ``sum coeffs[key] * value[key] = constant``, with constants fully
    evaluated from smaller brackets.
    """

    r: int
    n: int
    unknowns: Tuple[str, ...]
    equations: Tuple[Tuple[Dict[str, Fraction], Fraction], ...]

    def solve(self) -> Tuple[Dict[str, Fraction], List[str]]:
        """Run exact elimination; return (determined values, free keys)."""
        return solve_exact(self.unknowns, self.equations)


def _value(r: int, a: Tuple[int, ...], cache: CacheStore) -> Fraction:
    """Value of an arbitrary bracket, recursing through the window solver."""
    n = len(a)
    if sum(a) != (n - 2) * r - 2:
        return Fraction(0)
    if any(x == r - 1 for x in a):
        return Fraction(0)
    if n == 3:
        return Fraction(1)
    if n == 4:
        return four_point(r, *a).value
    if 0 in a:
        return Fraction(0)
    key = Genus0Bracket(r, a).key
    hit = cache.get(key)
    if hit is not None:
        return hit
    values, free = wdvv_equations(r, n, cache).solve()
    for k, v in values.items():
        cache.put(k, v)
    if key not in values:
        raise UnderdeterminedError(
            f"associativity equations leave {key} undetermined "
            f"({len(free)} free of {len(values) + len(free)} unknowns)"
        )
    return values[key]


def _term_factor(r: int, n: int, twists: Tuple[int, ...], cache: CacheStore):
    """Classify one product factor as an unknown key or a known exact value."""
    if (
        len(twists) == n
        and sum(twists) == (n - 2) * r - 2
        and all(1 <= t <= r - 2 for t in twists)
    ):
        return Genus0Bracket(r, twists).key, None
    return None, _value(r, twists, cache)


def _pairing_terms(
    r: int,
    n: int,
    first: Tuple[int, int],
    second: Tuple[int, int],
    rest: Tuple[int, ...],
    cache: CacheStore,
) -> Tuple[Dict[str, Fraction], Fraction]:
    """Expand one degeneration side into (unknown coefficients, known part).

    The four distinguished twists split as ``first | second``; the remaining
    insertions distribute over the two components in all ways, and each
    component picks up the node twist forced by its side. Components that
    vanish (bad grading, twist ``r - 1``, zero twist on 4+ points) drop out
    through ``_value`` returning 0.
    """
    coeffs: Dict[str, Fraction] = {}
    const = Fraction(0)
    indices = range(len(rest))
    for size in range(len(rest) + 1):
        for picked in combinations(indices, size):
            chosen = set(picked)
            left = list(first) + [rest[i] for i in indices if i in chosen]
            right = list(second) + [rest[i] for i in indices if i not in chosen]
            nu = node_label(r, left)
            if nu == r - 1:
                # The left component carries the vanishing twist, so the
                # whole product term is zero (and the complementary node
                # twist r - 2 - nu would fall out of range).
                continue
            left_t = tuple(left) + (nu,)
            right_t = tuple(right) + (r - 2 - nu,)
            lk, lv = _term_factor(r, n, left_t, cache)
            rk, rv = _term_factor(r, n, right_t, cache)
            if lk is not None and rk is not None:
                raise ValueError("two same-size unknown factors cannot arise")
            if lk is not None:
                if rv != 0:
                    coeffs[lk] = coeffs.get(lk, Fraction(0)) + rv
            elif rk is not None:
                if lv != 0:
                    coeffs[rk] = coeffs.get(rk, Fraction(0)) + lv
            else:
                const += lv * rv
    return coeffs, const


def wdvv_equations(r: int, n: int, cache: Optional[CacheStore] = None) -> WdvvSystem:
    """Build the exact associativity system for all n-point unknowns at r.

    Every instance comes from a multiset of ``n + 1`` twists (graded so that
    each two-component degeneration can satisfy both component gradings)
    with four distinguished insertions; equating two distinct pairings of
    the distinguished four yields one linear equation. All instances are
    enumerated, normalized (leading coefficient 1), and deduplicated.
    Unknowns are the grading-valid n-point keys with twists in
    ``[1, r - 2]``; anything else is already known to the recursion.
    """
    _check_r(r)
    if n < 5:
        raise GradingError(f"the associativity solver starts at n=5, got n={n}")
    if cache is None:
        cache = _DEFAULT_CACHE
    unknowns = tuple(
        Genus0Bracket(r, ms).key
        for ms in ascending_multisets(1, r - 2, n, (n - 2) * r - 2)
    )
    total = (n - 2) * r - 2
    equations: List[Tuple[Dict[str, Fraction], Fraction]] = []
    seen = set()
    for y in ascending_multisets(0, max(0, r - 2), n + 1, total):
        for dist in sorted(set(combinations(y, 4))):
            rest = list(y)
            for v in dist:
                rest.remove(v)
            rest_t = tuple(rest)
            d0, d1, d2, d3 = dist
            raw = [
                ((d0, d1), (d2, d3)),
                ((d0, d2), (d1, d3)),
                ((d0, d3), (d1, d2)),
            ]
            partitions = []
            seen_parts = set()
            for p, q in raw:
                tag = tuple(sorted((tuple(sorted(p)), tuple(sorted(q)))))
                if tag not in seen_parts:
                    seen_parts.add(tag)
                    partitions.append((p, q))
            for (pa, pb) in combinations(partitions, 2):
                ca, ka = _pairing_terms(r, n, pa[0], pa[1], rest_t, cache)
                cb, kb = _pairing_terms(r, n, pb[0], pb[1], rest_t, cache)
                coeffs = dict(ca)
                for k, v in cb.items():
                    coeffs[k] = coeffs.get(k, Fraction(0)) - v
                coeffs = {k: v for k, v in coeffs.items() if v != 0}
                rhs = kb - ka
                if not coeffs:
                    if rhs != 0:
                        raise ValueError("inconsistent associativity instance")
                    continue
                lead = next(v for k, v in sorted(coeffs.items()))
                norm = {k: v / lead for k, v in coeffs.items()}
                tag = (tuple(sorted(norm.items())), rhs / lead)
                if tag in seen:
                    continue
                seen.add(tag)
                equations.append((norm, rhs / lead))
    return WdvvSystem(r, n, unknowns, tuple(equations))


def solve_bracket(r: int, a: Sequence[int], cache: Optional[CacheStore] = None) -> EvalResult:
    """Evaluate a genus-0 bracket of any size, exactly.

    Dispatch order: grading check, vanishing axiom, closed 3/4-point forms,
    the zero-twist rule for five or more insertions, then the associativity
    system at (r, n) with memoization through ``cache``. Raises
    ``UnderdeterminedError`` if the system does not pin the bracket down;
    the value is never guessed.
    """
    if cache is None:
        cache = _DEFAULT_CACHE
    bracket = Genus0Bracket(r, a)
    a_sorted = bracket.a
    if not genus0_selection(r, a_sorted):
        return EvalResult(Fraction(0), STATUS_DIMENSION_ZERO, ("selection",))
    if any(x == r - 1 for x in a_sorted):
        return EvalResult(Fraction(0), STATUS_VANISHING_ZERO, ("vanishing-axiom",))
    if bracket.n == 3:
        return EvalResult(Fraction(1), STATUS_OK, ("three-point",))
    if bracket.n == 4:
        return EvalResult(four_point(r, *a_sorted).value, STATUS_OK, ("four-point",))
    if 0 in a_sorted:
        return EvalResult(Fraction(0), STATUS_OK, ("zero-entry",))
    cached = cache.get(bracket.key)
    if cached is not None:
        return EvalResult(cached, STATUS_OK, ("cache",))
    value = _value(r, a_sorted, cache)
    return EvalResult(value, STATUS_OK, ("wdvv-elimination",))


def bracket_window_sum(
    r: int, m: int, x: Sequence[int], cache: Optional[CacheStore] = None
) -> Fraction:
    """Brute-force window sum ``sum_{a+b=m} <a, b, x...>`` over in-range pairs.

    This is the quantity :func:`loop_sum` models. Twist pairs run over all
    ``a + b = m`` with ``0 <= a, b <= r - 1``; each bracket is evaluated by
    :func:`solve_bracket`, so the two sides of the comparison come from
    independent routes.
    """
    _check_r(r)
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise GradingError(f"window sum bound m={m!r} must be a non-negative integer")
    xs = _check_twists(r, x)
    total = Fraction(0)
    for a in range(max(0, m - (r - 1)), min(r - 1, m) + 1):
        total += solve_bracket(r, (a, m - a) + xs, cache).value
    return total
