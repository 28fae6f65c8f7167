"""Shared exact-arithmetic layer: canonical bracket keys and grading rules.

Everything downstream (the genus-0 evaluators, the genus-1 bracket solvers,
the verification suites, the cache, the CLI) works in terms of the two key
types defined here and the handful of arithmetic predicates that decide
whether a bracket can be nonzero at all:

* ``Genus0Bracket``: a genus-0 correlator key ``(r; a_1..a_n)``, twists
  ``a_i`` in ``[0, r-1]``, symmetric in its insertions. Canonical form sorts
  the twists ascending.
* ``DR1Bracket``: a genus-1 double-ramification bracket key
  ``(r; (k_1, a_1)..(k_n, a_n))`` with balanced integer orders
  (``sum k_i = 0``, not all zero). The value is invariant under permuting
  the pairs and under negating every ``k_i`` at once, so the canonical form
  fixes both an entry order and a sign orientation.

Values are plain ``fractions.Fraction`` throughout; no floating point is
used anywhere in the package. ``Rational`` is an alias so signatures read
like the interface they implement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Tuple

__all__ = [
    "Rational",
    "GradingError",
    "StructureError",
    "UnderdeterminedError",
    "ReductionStalledError",
    "CacheError",
    "STATUS_OK",
    "STATUS_DIMENSION_ZERO",
    "STATUS_VANISHING_ZERO",
    "EvalResult",
    "Genus0Bracket",
    "DR1Bracket",
    "genus_of",
    "genus0_selection",
    "dr1_selection",
    "spin_divisibility",
    "vanishing_by_axiom",
    "format_rational",
    "parse_rational",
    "parse_key",
]

Rational = Fraction


class GradingError(ValueError):
    """A twist is out of range or a dimension precondition cannot hold."""


class StructureError(ValueError):
    """A key is structurally invalid (unbalanced orders, too few entries)."""


class UnderdeterminedError(RuntimeError):
    """The linear system left the requested bracket undetermined."""


class ReductionStalledError(RuntimeError):
    """The relation-driven solver could not reduce the requested bracket."""


class CacheError(ValueError):
    """A cache file or cache key violates the store contract."""


STATUS_OK = "ok"
STATUS_DIMENSION_ZERO = "dimension-mismatch-zero"
STATUS_VANISHING_ZERO = "vanishing-axiom-zero"

_VALUE_RE = re.compile(r"^(-?\d+)/(\d+)$")


def _check_r(r: int) -> int:
    if not isinstance(r, int) or isinstance(r, bool) or r < 2:
        raise GradingError(f"r must be an integer >= 2, got {r!r}")
    return r


def _check_twists(r: int, a: Iterable[int]) -> Tuple[int, ...]:
    """Validate twists against [0, r-1] and return them as a tuple."""
    out = []
    for x in a:
        if not isinstance(x, int) or isinstance(x, bool):
            raise GradingError(f"twist {x!r} is not an integer")
        if not 0 <= x <= r - 1:
            raise GradingError(f"twist {x} out of range [0, {r - 1}] for r={r}")
        out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class EvalResult:
    """An exact bracket value together with the rule that produced it.

    ``status`` is ``"ok"`` for a genuine evaluation (which may still be 0,
    e.g. a four-point bracket whose minimum twist distance vanishes),
    ``"dimension-mismatch-zero"`` when the grading rules out a nonzero
    pairing, and ``"vanishing-axiom-zero"`` when a twist equals ``r - 1``.
    A non-``ok`` status forces value 0. ``trace`` lists the rules applied,
    outermost first.
    """

    value: Fraction
    status: str = STATUS_OK
    trace: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.status not in (STATUS_OK, STATUS_DIMENSION_ZERO, STATUS_VANISHING_ZERO):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status != STATUS_OK and self.value != 0:
            raise ValueError(f"status {self.status} requires value 0, got {self.value}")
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


def genus_of(r: int, insertions: Sequence[Tuple[int, int]]) -> Optional[int]:
    """Genus pinned down by a list of ``(psi_power, twist)`` insertions.

    The grading of the integrand fixes the genus through the linear equation
    ``(r+1)(2g-2+n) = sum(r*d_i + a_i + 1)``. Returns the unique integer
    solution ``g >= 0``, or ``None`` when no such integer exists.

    >>> genus_of(2, [(1, 0)])
    1
    >>> genus_of(5, [(0, 1), (0, 1), (0, 1)])
    0
    >>> genus_of(3, [(0, 0), (0, 0), (0, 0)]) is None
    True
    """
    _check_r(r)
    n = len(insertions)
    total = 0
    for d, a in insertions:
        if not isinstance(d, int) or isinstance(d, bool) or d < 0:
            raise GradingError(f"psi power {d!r} must be a non-negative integer")
        _check_twists(r, (a,))
        total += r * d + a + 1
    if total % (r + 1) != 0:
        return None
    t = total // (r + 1)  # equals 2g - 2 + n
    if (t + 2 - n) % 2 != 0:
        return None
    g = (t + 2 - n) // 2
    return g if g >= 0 else None


def genus0_selection(r: int, a: Sequence[int]) -> bool:
    """True iff the twists satisfy the genus-0 grading ``sum a = (n-2)r - 2``."""
    _check_r(r)
    a = _check_twists(r, a)
    return sum(a) == (len(a) - 2) * r - 2


def dr1_selection(r: int, a: Sequence[int]) -> bool:
    """True iff the twists satisfy the genus-1 grading ``sum a = (n-1)r``."""
    _check_r(r)
    a = _check_twists(r, a)
    return sum(a) == (len(a) - 1) * r


def spin_divisibility(r: int, g: int, a: Sequence[int]) -> bool:
    """True iff ``r`` divides ``2g - 2 - sum(a)``, the spin-structure constraint."""
    _check_r(r)
    if not isinstance(g, int) or isinstance(g, bool) or g < 0:
        raise GradingError(f"genus {g!r} must be a non-negative integer")
    a = _check_twists(r, a)
    return (2 * g - 2 - sum(a)) % r == 0


def vanishing_by_axiom(r: int, a: Sequence[int]) -> bool:
    """True iff some twist equals ``r - 1``, which kills the integrand class."""
    _check_r(r)
    a = _check_twists(r, a)
    return any(x == r - 1 for x in a)


@dataclass(frozen=True, order=True)
class Genus0Bracket:
    """Canonical key of a genus-0 correlator: ``r`` and ascending twists."""

    r: int
    a: Tuple[int, ...]

    def __init__(self, r: int, a: Sequence[int]):
        _check_r(r)
        twists = _check_twists(r, a)
        if len(twists) < 3:
            raise StructureError(f"a genus-0 bracket needs >= 3 insertions, got {len(twists)}")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "a", tuple(sorted(twists)))

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def selection_ok(self) -> bool:
        return genus0_selection(self.r, self.a)

    @property
    def key(self) -> str:
        return f"g0:r={self.r}:a={','.join(map(str, self.a))}"


def _sorted_dr1_entries(entries: Sequence[Tuple[int, int]]) -> Tuple[Tuple[int, int], ...]:
    """Order pairs: positive k descending, zeros, negative |k| ascending; twist ties ascending."""
    pos = sorted((e for e in entries if e[0] > 0), key=lambda e: (-e[0], e[1]))
    zero = sorted((e for e in entries if e[0] == 0), key=lambda e: e[1])
    neg = sorted((e for e in entries if e[0] < 0), key=lambda e: (-e[0], e[1]))
    return tuple(pos + zero + neg)


@dataclass(frozen=True, order=True)
class DR1Bracket:
    """Canonical key of a genus-1 double-ramification bracket.

    ``entries`` holds the ``(k_i, a_i)`` pairs. Construction canonicalizes:
    the pairs are sorted (positive orders descending, then the zero-order
    entries, then negative orders by ascending magnitude, twist breaking
    ties), and the overall sign of the ``k_i`` row is flipped, if necessary,
    so the lexicographically larger magnitude profile sits on the positive
    side. Two inputs describing the same bracket therefore always compare
    and hash equal.
    """

    r: int
    entries: Tuple[Tuple[int, int], ...]

    def __init__(self, r: int, entries: Sequence[Tuple[int, int]]):
        _check_r(r)
        pairs = []
        for item in entries:
            k, a = item
            if not isinstance(k, int) or isinstance(k, bool):
                raise StructureError(f"order {k!r} is not an integer")
            _check_twists(r, (a,))
            pairs.append((k, a))
        if sum(k for k, _ in pairs) != 0:
            raise StructureError(f"orders must balance to 0, got sum {sum(k for k, _ in pairs)}")
        if all(k == 0 for k, _ in pairs):
            raise StructureError("at least one order must be nonzero")
        cand = _sorted_dr1_entries(pairs)
        flip = _sorted_dr1_entries([(-k, a) for k, a in pairs])
        cand_profile = tuple(k for k, _ in cand if k > 0)
        flip_profile = tuple(k for k, _ in flip if k > 0)
        if flip_profile > cand_profile:
            chosen = flip
        elif flip_profile < cand_profile:
            chosen = cand
        else:
            chosen = min(cand, flip)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "entries", chosen)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def k_row(self) -> Tuple[int, ...]:
        return tuple(k for k, _ in self.entries)

    @property
    def a_row(self) -> Tuple[int, ...]:
        return tuple(a for _, a in self.entries)

    @property
    def n_plus(self) -> int:
        return sum(1 for k, _ in self.entries if k > 0)

    @property
    def n_zero(self) -> int:
        return sum(1 for k, _ in self.entries if k == 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for k, _ in self.entries if k < 0)

    @property
    def selection_ok(self) -> bool:
        return dr1_selection(self.r, self.a_row)

    @property
    def key(self) -> str:
        ks = ",".join(map(str, self.k_row))
        aa = ",".join(map(str, self.a_row))
        return f"dr1:r={self.r}:k={ks}:a={aa}"


def ascending_multisets(lo: int, hi: int, count: int, total: int):
    """Yield every ascending ``count``-tuple over [lo, hi] with the given sum.

    The window enumerators and the associativity generator all iterate over
    twist multisets under a sum constraint; emitting them in ascending-tuple
    order makes every enumeration deterministic.
    """
    if count == 0:
        if total == 0:
            yield ()
        return
    for first in range(lo, hi + 1):
        rest_total = total - first
        if rest_total < first * (count - 1) or rest_total > hi * (count - 1):
            continue
        for rest in ascending_multisets(first, hi, count - 1, rest_total):
            yield (first,) + rest


def format_rational(value: Fraction) -> str:
    """Serialize a value as ``"<num>/<den>"`` with the denominator kept explicit."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse the ``"<num>/<den>"`` serialization back into an exact value."""
    m = _VALUE_RE.match(text)
    if not m:
        raise CacheError(f"malformed rational {text!r} (expected '<num>/<den>')")
    num, den = int(m.group(1)), int(m.group(2))
    if den == 0:
        raise CacheError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def _parse_int_list(text: str, what: str) -> Tuple[int, ...]:
    if text == "":
        raise StructureError(f"empty {what} list")
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise StructureError(f"malformed {what} list {text!r}") from exc


def parse_key(key: str):
    """Parse a canonical key string back into its bracket object.

    Accepts the two formats emitted by :attr:`Genus0Bracket.key` and
    :attr:`DR1Bracket.key`. The returned bracket is re-canonicalized, so
    ``parse_key(k).key == k`` holds exactly when ``k`` was canonical.
    """
    parts = key.split(":")
    try:
        if parts[0] == "g0" and len(parts) == 3:
            r = int(_expect_field(parts[1], "r"))
            a = _parse_int_list(_expect_field(parts[2], "a"), "twist")
            return Genus0Bracket(r, a)
        if parts[0] == "dr1" and len(parts) == 4:
            r = int(_expect_field(parts[1], "r"))
            k = _parse_int_list(_expect_field(parts[2], "k"), "order")
            a = _parse_int_list(_expect_field(parts[3], "a"), "twist")
            if len(k) != len(a):
                raise StructureError(f"order/twist length mismatch in {key!r}")
            return DR1Bracket(r, tuple(zip(k, a)))
    except (GradingError, StructureError):
        raise
    except ValueError as exc:
        raise StructureError(f"malformed key {key!r}") from exc
    raise StructureError(f"unrecognized key {key!r}")


def _expect_field(part: str, name: str) -> str:
    prefix = name + "="
    if not part.startswith(prefix):
        raise StructureError(f"expected '{prefix}...', got {part!r}")
    return part[len(prefix):]
