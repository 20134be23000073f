"""Measurement suite: elasticity, slowdown, cost, and utilization.

Demand and supply are integer counts sampled once per autoscaling interval.
The elasticity accumulators stay in exact integer arithmetic until a single
final division, so results are reproducible bit for bit.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True)
class IntervalSnapshot:
    """Per-interval, per-user observation row."""

    interval: int
    user: str
    demand: int
    supply: int
    busy: int
    allocated_cost: int


@dataclass(frozen=True)
class ElasticityReport:
    """Under/over-provisioning accuracy and time-share metrics.

    ``accuracy_under`` averages the resource-count shortfall max(d-s, 0) over
    the observation window, normalized by capacity; ``time_under`` is the
    fraction of intervals with any shortfall. The ``_over`` pair mirrors this
    for surplus. Intervals whose demand exceeds capacity are excluded from
    the window, and ``excluded`` reports how many were dropped.
    """

    accuracy_under: float
    accuracy_over: float
    time_under: float
    time_over: float
    excluded: int = 0


def elasticity(
    demand: Sequence[int], supply: Sequence[int], capacity: int
) -> ElasticityReport:
    if len(demand) != len(supply):
        raise ValueError("demand and supply series must have equal length")
    under_area = 0
    over_area = 0
    under_time = 0
    over_time = 0
    kept = 0
    excluded = 0
    for d, s in zip(demand, supply):
        if d > capacity:
            excluded += 1
            continue
        kept += 1
        if d > s:
            under_area += d - s
            under_time += 1
        elif s > d:
            over_area += s - d
            over_time += 1
    if kept == 0 or capacity == 0:
        return ElasticityReport(0.0, 0.0, 0.0, 0.0, excluded)
    return ElasticityReport(
        accuracy_under=under_area / (kept * capacity),
        accuracy_over=over_area / (kept * capacity),
        time_under=under_time / kept,
        time_over=over_time / kept,
        excluded=excluded,
    )


def slowdown(arrival_s: int, last_finish_s: int, ideal_makespan_s: int) -> float:
    """Response time over the ideal critical-path makespan.

    Response covers waiting: last task finish minus workflow arrival. With
    tasks on their fastest types and no queueing this equals 1.0.
    """
    if ideal_makespan_s <= 0:
        raise ValueError("ideal makespan must be positive")
    return (last_finish_s - arrival_s) / ideal_makespan_s


def cost_stats(series: Sequence[int]) -> dict[str, float]:
    """Mean and max of a per-interval cost series."""
    if not series:
        return {"mean": 0.0, "max": 0}
    return {"mean": sum(series) / len(series), "max": max(series)}


@dataclass(frozen=True)
class UtilizationReport:
    busy_of_allocated: float
    busy_of_capacity: float
    allocated_of_capacity: float


def utilization(
    snapshots: Iterable[IntervalSnapshot], capacity: int
) -> UtilizationReport:
    """Average busy/allocated fractions over interval snapshots.

    ``busy_of_allocated`` averages busy/supply over intervals that had any
    allocation; the capacity fractions average over all intervals.
    """
    busy_alloc: list[float] = []
    busy_cap: list[float] = []
    alloc_cap: list[float] = []
    for snap in snapshots:
        if snap.supply > 0:
            busy_alloc.append(snap.busy / snap.supply)
        if capacity > 0:
            busy_cap.append(snap.busy / capacity)
            alloc_cap.append(snap.supply / capacity)
    mean = lambda xs: sum(xs) / len(xs) if xs else 0.0
    return UtilizationReport(mean(busy_alloc), mean(busy_cap), mean(alloc_cap))


def summarize(
    slowdowns_by_user: Mapping[str, Sequence[float]],
    cost_series_by_user: Mapping[str, Sequence[int]],
    elasticity_by_user: Mapping[str, ElasticityReport],
    decision_stats: Mapping[str, Mapping[str, float]] | None = None,
) -> dict:
    """Assemble the metric summary structure written as JSON by the CLI."""
    per_user: dict[str, dict] = {}
    users = sorted(
        set(slowdowns_by_user) | set(cost_series_by_user) | set(elasticity_by_user)
    )
    for user in users:
        slows = list(slowdowns_by_user.get(user, ()))
        el = elasticity_by_user.get(user)
        per_user[user] = {
            "mean_slowdown": statistics.fmean(slows) if slows else None,
            "median_slowdown": statistics.median(slows) if slows else None,
            "cost": cost_stats(list(cost_series_by_user.get(user, ()))),
            "elasticity": None
            if el is None
            else {
                "aU": el.accuracy_under,
                "aO": el.accuracy_over,
                "tU": el.time_under,
                "tO": el.time_over,
            },
        }
    summary = {"per_user": per_user}
    if decision_stats is not None:
        summary["per_policy_runtime_stats"] = dict(decision_stats)
    return summary


__all__ = [
    "ElasticityReport",
    "IntervalSnapshot",
    "UtilizationReport",
    "cost_stats",
    "elasticity",
    "slowdown",
    "summarize",
    "utilization",
]
