"""Exact linear solving in rspin.elimination."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from rspin.elimination import solve_exact


def F(x):
    return Fraction(x)


def test_fully_determined_system():
    values, free = solve_exact(
        ["x", "y"],
        [({"x": F(2), "y": F(1)}, F(5)), ({"x": F(1), "y": F(-1)}, F(1))],
    )
    assert free == []
    assert values == {"x": F(2), "y": F(1)}


def test_partially_determined_system():
    # x pinned, y and z only constrained jointly
    values, free = solve_exact(
        ["x", "y", "z"],
        [({"x": F(1)}, F(3)), ({"y": F(1), "z": F(1)}, F(1))],
    )
    assert values == {"x": F(3)}
    assert free == ["z"]


def test_redundant_rows_are_harmless():
    values, free = solve_exact(
        ["x"],
        [({"x": F(2)}, F(4)), ({"x": F(3)}, F(6)), ({"x": F(1)}, F(2))],
    )
    assert values == {"x": F(2)}
    assert free == []


def test_inconsistent_system_raises():
    with pytest.raises(ValueError, match="inconsistent"):
        solve_exact(["x"], [({"x": F(1)}, F(1)), ({"x": F(1)}, F(2))])


def test_undeclared_unknown_raises():
    with pytest.raises(ValueError):
        solve_exact(["x"], [({"y": F(1)}, F(1))])


def test_empty_system():
    values, free = solve_exact(["x"], [])
    assert values == {}
    assert free == ["x"]


@given(
    st.lists(
        st.tuples(
            st.fractions(max_denominator=7),
            st.fractions(max_denominator=7),
        ),
        min_size=2,
        max_size=6,
    ),
    st.fractions(max_denominator=5),
    st.fractions(max_denominator=5),
)
def test_planted_solution_recovered(rows, x0, y0):
    equations = [
        ({"x": cx, "y": cy}, cx * x0 + cy * y0) for cx, cy in rows
    ]
    values, _free = solve_exact(["x", "y"], equations)
    # consistent by construction; every determined unknown matches the plant
    for name, planted in (("x", x0), ("y", y0)):
        if name in values:
            assert values[name] == planted
