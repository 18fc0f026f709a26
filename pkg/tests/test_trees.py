import math
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sweepout.constants import lambda_tilde
from sweepout.errors import InvalidArgument
from sweepout.trees import (
    check_linear_growth,
    children,
    decomposition_cost,
    interior_cost,
    supremal_cost,
    validate_decomposition,
    validate_tree,
)


def brute_cost(X, lam, n, h):
    """Max cost over every grid tree, by explicit enumeration of splits."""
    p = (n - 1) / n
    lam = Fraction(lam)
    h = Fraction(h)

    @lru_cache(maxsize=None)
    def sub(x):
        opts = [0.0]
        a = h
        while a <= x - 1:
            b = x - a
            if a >= 1 and b >= 1 and a >= lam * x and b >= lam * x:
                opts.append(float(a) ** p + sub(a) + float(b) ** p + sub(b))
            a += h
        return max(opts)

    X = Fraction(X)
    return float(X) ** p + sub(X)


def test_children():
    assert children("") == ("0", "1")
    assert children("01") == ("010", "011")


def test_validate_tree():
    assert validate_tree(["0", "1", "00", "01"])[0]
    ok, bad = validate_tree(["0", "1", "00"])
    assert not ok and "sibling" in bad[0]
    ok, bad = validate_tree(["0", "1", "000", "001"])
    assert not ok and any("prefix" in v for v in bad)
    assert not validate_tree(["0", "1", "0a"])[0]


def test_decomposition_rules():
    w = validate_decomposition(4.0, {"0": 2.0, "1": 2.0, "00": 1.0, "01": 1.0}, 0.25)
    assert w.valid
    assert decomposition_cost(w, 2) == pytest.approx(2 + 2 * math.sqrt(2) + 2)
    assert interior_cost(w, 2) == pytest.approx(2 + math.sqrt(2))
    w = validate_decomposition(4.0, {"0": 3.5, "1": 0.5}, 0.1)
    assert not w.valid
    w = validate_decomposition(4.0, {"0": 3.9, "1": 0.1 + 1.0}, 0.25)
    assert not w.valid  # children do not sum to the parent
    w = validate_decomposition(4.0, {"0": 3.0, "1": 1.0}, 0.3)
    assert not w.valid  # 1 < 0.3 * 4


def test_strict_root():
    values = {"0": 1.0, "1": 3.0}
    assert validate_decomposition(4.0, values, 0.25).valid
    assert not validate_decomposition(4.0, values, 0.25, strict_root=True).valid


def test_invalid_tree_raises():
    with pytest.raises(InvalidArgument):
        validate_decomposition(2.0, {"0": 1.0}, 0.25)
    with pytest.raises(InvalidArgument):
        validate_decomposition(2.0, {"0": 1.0, "1": 1.0}, 0.7)


@pytest.mark.parametrize("lam", [0.25, 0.5, 1 / 8])
@pytest.mark.parametrize("n", [2, 3])
def test_supremal_cost_matches_enumeration(lam, n):
    h = 0.25
    for X in (1.0, 1.75, 2.0, 2.5, 3.25, 4.0, 5.0):
        assert supremal_cost(X, lam, n, h) == pytest.approx(brute_cost(X, lam, n, h), rel=1e-12)


def test_supremal_cost_no_split_below_two():
    assert supremal_cost(1.0, 0.25, 2) == pytest.approx(1.0)
    assert supremal_cost(1.9, 0.25, 2) == pytest.approx(1.9**0.5)


def test_supremal_cost_rejects():
    with pytest.raises(InvalidArgument):
        supremal_cost(0.5, 0.25, 2)
    with pytest.raises(InvalidArgument):
        supremal_cost(2.0, 0.25, 2, resolution=0)


def test_linear_growth_equality_cases():
    c = check_linear_growth(1.0, 0.25, 2)
    assert c.lhs == pytest.approx(c.rhs, abs=1e-9)
    c = check_linear_growth(2.0, 0.5, 2)
    assert c.lhs == pytest.approx(4 + 2 * math.sqrt(2), abs=1e-9)
    assert c.rhs == pytest.approx(4 + 2 * math.sqrt(2), abs=1e-9)
    assert c.passed


@st.composite
def grid_trees(draw, lam=0.25):
    """Random decompositions with values on the quarter grid."""
    X = draw(st.integers(4, 40)) / 4
    values = {}
    stack = [("", X)]
    while stack:
        alpha, x = stack.pop()
        lo = max(1.0, lam * x)
        hi = x - lo
        if hi < lo or len(values) > 30 or not draw(st.booleans()):
            continue
        a = draw(st.integers(math.ceil(lo * 4 - 1e-9), math.floor(hi * 4 + 1e-9))) / 4
        c0, c1 = children(alpha)
        values[c0], values[c1] = a, x - a
        stack += [(c0, a), (c1, x - a)]
    return X, values


@settings(max_examples=60, deadline=None)
@given(grid_trees())
def test_random_decompositions_grow_linearly(tree):
    X, values = tree
    if not values:
        return
    w = validate_decomposition(X, values, 0.25)
    assert w.valid
    cost = decomposition_cost(w, 2)
    lt = lambda_tilde(0.25, 2)
    assert cost <= supremal_cost(X, 0.25, 2, 0.25) + 1e-9
    assert cost + lt * math.sqrt(X) <= (1 + lt) * X * (1 + 1e-12)
