"""Elasticity, slowdown, cost, and utilization metrics.

The elasticity oracle below is a direct transliteration of the metric
definitions, written before the library implementation and kept independent
of it: filter out intervals whose demand exceeds capacity, accumulate
integer areas and interval counts over what remains, divide once.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wfasim.metrics import (
    ElasticityReport,
    IntervalSnapshot,
    cost_stats,
    elasticity,
    slowdown,
    summarize,
    utilization,
)


def oracle_elasticity(demand, supply, capacity):
    kept = [(d, s) for d, s in zip(demand, supply) if d <= capacity]
    excluded = len(demand) - len(kept)
    if not kept or capacity == 0:
        return (0.0, 0.0, 0.0, 0.0, excluded)
    t = len(kept)
    a_under = sum(max(d - s, 0) for d, s in kept) / (t * capacity)
    a_over = sum(max(s - d, 0) for d, s in kept) / (t * capacity)
    t_under = sum(1 for d, s in kept if d > s) / t
    t_over = sum(1 for d, s in kept if s > d) / t
    return (a_under, a_over, t_under, t_over, excluded)


def as_tuple(rep: ElasticityReport):
    return (rep.accuracy_under, rep.accuracy_over, rep.time_under, rep.time_over,
            rep.excluded)


def test_pure_underprovisioning():
    # demand 3 vs supply 1 in both intervals, capacity 4:
    # area (2+2)/(2*4) = 0.5, shortfall in every interval
    rep = elasticity([3, 3], [1, 1], capacity=4)
    assert as_tuple(rep) == (0.5, 0.0, 1.0, 0.0, 0)


def test_mixed_over_and_under():
    # interval 1: 2 over; interval 2: 2 under; each half the time
    rep = elasticity([0, 4], [2, 2], capacity=4)
    assert as_tuple(rep) == (0.25, 0.25, 0.5, 0.5, 0)


def test_exact_match_is_zero_everywhere():
    rep = elasticity([2, 3, 1], [2, 3, 1], capacity=4)
    assert as_tuple(rep) == (0.0, 0.0, 0.0, 0.0, 0)


def test_over_capacity_intervals_are_excluded_and_window_rescaled():
    # first interval demand 5 > capacity 4 drops out entirely; the metric
    # is computed over the single remaining interval
    rep = elasticity([5, 3], [1, 1], capacity=4)
    assert as_tuple(rep) == (0.5, 0.0, 1.0, 0.0, 1)
    assert as_tuple(rep) == oracle_elasticity([5, 3], [1, 1], 4)


def test_all_intervals_excluded():
    rep = elasticity([9, 9], [1, 1], capacity=4)
    assert as_tuple(rep) == (0.0, 0.0, 0.0, 0.0, 2)


def test_empty_series():
    assert as_tuple(elasticity([], [], capacity=4)) == (0.0, 0.0, 0.0, 0.0, 0)


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        elasticity([1], [1, 2], capacity=4)


@settings(max_examples=300, deadline=None)
@given(
    pairs=st.lists(
        st.tuples(st.integers(0, 12), st.integers(0, 12)), min_size=0, max_size=40
    ),
    capacity=st.integers(1, 10),
)
def test_matches_oracle_bit_exactly(pairs, capacity):
    demand = [d for d, _ in pairs]
    supply = [s for _, s in pairs]
    got = as_tuple(elasticity(demand, supply, capacity))
    want = oracle_elasticity(demand, supply, capacity)
    assert got == want  # float equality intended: same integer ratios


def test_slowdown_definition():
    # arrived at 100, finished at 320, ideal 110: response 220 over 110
    assert slowdown(100, 320, 110) == 2.0
    assert slowdown(0, 110, 110) == 1.0


def test_slowdown_rejects_zero_ideal():
    with pytest.raises(ValueError):
        slowdown(0, 10, 0)


def test_cost_stats():
    assert cost_stats([1, 2, 3]) == {"mean": 2.0, "max": 3}
    assert cost_stats([]) == {"mean": 0.0, "max": 0}


def test_utilization_averages():
    snaps = [
        IntervalSnapshot(0, "u1", demand=4, supply=4, busy=2, allocated_cost=4),
        IntervalSnapshot(1, "u1", demand=4, supply=2, busy=2, allocated_cost=2),
        IntervalSnapshot(2, "u1", demand=0, supply=0, busy=0, allocated_cost=0),
    ]
    rep = utilization(snaps, capacity=8)
    assert rep.busy_of_allocated == (2 / 4 + 2 / 2) / 2  # zero-supply row skipped
    assert rep.busy_of_capacity == (2 / 8 + 2 / 8 + 0) / 3
    assert rep.allocated_of_capacity == (4 / 8 + 2 / 8 + 0) / 3


def test_summary_shape():
    doc = summarize(
        slowdowns_by_user={"u1": [1.0, 3.0]},
        cost_series_by_user={"u1": [4, 6]},
        elasticity_by_user={"u1": elasticity([2], [2], 4)},
        decision_stats={"pfa-ma": {"mean_s": 0.001}},
    )
    u1 = doc["per_user"]["u1"]
    assert u1["mean_slowdown"] == 2.0
    assert u1["median_slowdown"] == 2.0
    assert u1["cost"] == {"mean": 5.0, "max": 6}
    assert u1["elasticity"] == {"aU": 0.0, "aO": 0.0, "tU": 0.0, "tO": 0.0}
    assert doc["per_policy_runtime_stats"] == {"pfa-ma": {"mean_s": 0.001}}


def test_summary_tolerates_user_without_finishes():
    doc = summarize({"u1": []}, {"u1": [2]}, {})
    assert doc["per_user"]["u1"]["mean_slowdown"] is None
