"""Exact Gauss-Jordan elimination over rationals with deterministic pivoting.

The two bracket solvers reduce to the same linear-algebra question: given
equations ``sum coeff_j * U_j = constant`` over a fixed, ordered list of
unknowns, which unknowns are forced to a unique value? Columns are processed
in the order the caller supplies (the callers pass canonical key order), rows
by first usable index, so identical inputs always produce identical results.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Hashable, List, Mapping, Sequence, Tuple

__all__ = ["solve_exact"]


def solve_exact(
    unknowns: Sequence[Hashable],
    equations: Sequence[Tuple[Mapping[Hashable, Fraction], Fraction]],
) -> Tuple[Dict[Hashable, Fraction], List[Hashable]]:
    """Solve ``coeffs . U = constant`` rows for the determined unknowns.

    Parameters
    ----------
    unknowns:
        Ordered unknown identifiers; this order fixes the pivot order.
    equations:
        Rows ``(coeffs, constant)`` where ``coeffs`` maps unknowns to exact
        coefficients (missing entries are 0).

    Returns
    -------
    (values, free):
        ``values`` maps every determined unknown to its unique value;
        ``free`` lists the unknowns the system does not pin down, in input
        order. An unknown is determined exactly when it is a pivot column
        whose reduced row involves no free column.

    Raises
    ------
    ValueError
        If the rows are mutually inconsistent (some combination reduces to
        ``0 = c`` with ``c != 0``).
    """
    cols = {u: j for j, u in enumerate(unknowns)}
    width = len(unknowns)
    rows: List[List[Fraction]] = []
    for coeffs, const in equations:
        row = [Fraction(0)] * (width + 1)
        for u, c in coeffs.items():
            if u not in cols:
                raise ValueError(f"equation references undeclared unknown {u!r}")
            row[cols[u]] += Fraction(c)
        row[width] = Fraction(const)
        rows.append(row)

    pivot_row_of_col: Dict[int, int] = {}
    rank = 0
    for j in range(width):
        pivot = None
        for i in range(rank, len(rows)):
            if rows[i][j] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = 1 / rows[rank][j]
        rows[rank] = [c * inv for c in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][j] != 0:
                factor = rows[i][j]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[rank])]
        pivot_row_of_col[j] = rank
        rank += 1

    for i in range(rank, len(rows)):
        if rows[i][width] != 0:
            raise ValueError("inconsistent linear system")

    free_cols = [j for j in range(width) if j not in pivot_row_of_col]
    values: Dict[Hashable, Fraction] = {}
    free: List[Hashable] = [unknowns[j] for j in free_cols]
    for j, i in pivot_row_of_col.items():
        if all(rows[i][f] == 0 for f in free_cols):
            values[unknowns[j]] = rows[i][width]
    return values, free
