from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bellmono.lp import CoverageError, fractional_cover

from oracles import cover_lp


def test_triangle_half_weights():
    opt, w = fractional_cover(3, [[0, 1], [1, 2], [0, 2]], [2, 2, 2])
    assert opt == 3 and w == [Fraction(1, 2)] * 3


def test_five_cycle_of_pairs():
    cols = [[i, (i + 1) % 5] for i in range(5)]
    opt, w = fractional_cover(5, cols, [4] * 5)
    assert opt == 10


def test_weights_are_feasible_and_attain_optimum():
    cols = [[0, 1, 2], [2, 3], [3, 4], [0, 4], [1]]
    costs = [3, 2, 2, 2, 1]
    opt, w = fractional_cover(5, cols, costs)
    assert sum(wj * c for wj, c in zip(w, costs)) == opt
    for e in range(5):
        assert sum(wj for wj, col in zip(w, cols) if e in col) >= 1


def test_uncovered_element():
    with pytest.raises(CoverageError):
        fractional_cover(3, [[0, 1]], [1])


def test_empty_universe():
    assert fractional_cover(0, [[]], [1]) == (0, [0])


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_matches_float_lp(data):
    n = data.draw(st.integers(1, 6))
    cols = data.draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1), min_size=1, max_size=8))
    cols = [sorted(c) for c in cols] + [[e] for e in range(n)]
    costs = data.draw(st.lists(st.integers(1, 9), min_size=len(cols), max_size=len(cols)))
    opt, w = fractional_cover(n, cols, costs)
    assert abs(float(opt) - cover_lp(n, cols, costs)) < 1e-9
    assert all(x >= 0 for x in w)
    assert sum(x * c for x, c in zip(w, costs)) == opt
