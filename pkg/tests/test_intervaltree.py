import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from breakwatch.errors import EmptyTree, OutOfRange, Underflow
from breakwatch.intervaltree import IntervalTree

import oracles

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_insert_reaches_expected_leaf():
    t = IntervalTree(2)
    t.insert(0.3)
    assert t.leaf_counts.tolist() == [0, 1, 0, 0]
    assert t.total == 1


def test_one_goes_to_last_leaf():
    t = IntervalTree(2)
    t.insert(1.0)
    assert t.leaf_counts.tolist() == [0, 0, 0, 1]
    assert t.leaf_interval(1.0) == (0.75, 1.0)


@pytest.mark.parametrize("x", [-0.1, 1.5, float("nan")])
def test_out_of_range(x):
    with pytest.raises(OutOfRange):
        IntervalTree(2).insert(x)


def test_insert_remove_restores_zero():
    t = IntervalTree(2)
    t.insert(0.3)
    t.remove(0.3)
    assert not t.counts.any()


def test_remove_from_empty_underflows():
    t = IntervalTree(2)
    with pytest.raises(Underflow):
        t.remove(0.3)
    assert not t.counts.any()


def test_remove_by_leaf():
    t = IntervalTree(2)
    t.insert(0.3)
    t.insert(0.35)
    t.remove(0.3)
    assert t.leaf_counts.tolist() == [0, 1, 0, 0]


@pytest.mark.parametrize(
    "contents, expected",
    [([0.3], 0.375), ([0.1, 0.6, 0.9], 0.75)],
)
def test_median_examples(contents, expected):
    t = IntervalTree(2)
    for x in contents:
        t.insert(x)
    assert t.approximate_median() == expected


def test_empty_median():
    with pytest.raises(EmptyTree):
        IntervalTree(3).approximate_median()


def test_depth_must_be_positive():
    with pytest.raises(ValueError):
        IntervalTree(0)


@given(st.lists(unit, min_size=1, max_size=80), st.data())
def test_counts_conserved(values, data):
    t = IntervalTree(5)
    for x in values:
        t.insert(x)
    removed = data.draw(st.lists(st.sampled_from(range(len(values))), unique=True))
    for i in removed:
        t.remove(values[i])
    assert t.total == len(values) - len(removed)
    assert t.audit()


@given(st.lists(unit, min_size=1, max_size=80))
def test_round_trip_restores_zero(values):
    t = IntervalTree(6)
    for x in values:
        t.insert(x)
    for x in reversed(values):
        t.remove(x)
    assert not t.counts.any()


@given(st.lists(unit, min_size=1, max_size=120), st.integers(1, 12))
def test_matches_interval_counting_oracle(values, depth):
    t = IntervalTree(depth)
    for x in values:
        t.insert(x)
    assert t.approximate_median() == oracles.tree_median(values, depth)


@given(st.lists(unit, min_size=1, max_size=120), st.integers(1, 12))
def test_leaf_answer_within_one_leaf_width(values, depth):
    t = IntervalTree(depth)
    for x in values:
        t.insert(x)
    approx = t.approximate_median()
    k = (len(values) + 1) // 2
    kth = sorted(values)[k - 1]
    w = 2.0**-depth
    _, tie = oracles.tree_median(values, depth, report_tie=True)
    if not tie:
        lo, hi = t.leaf_interval(approx)
        assert lo <= kth <= hi
        assert abs(approx - kth) <= w
