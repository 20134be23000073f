"""Plan-based policies: planner, budget-per-workflow, and plan scaling."""

import random

import pytest

from conftest import chain_wf, two_type_system, users, wf
from wfasim.model import OverCommitted, ResourceType, TaskSpec, UserConfig
from wfasim.policies.base import PolicyView, perfect_oracle
from wfasim.policies.plan import (
    PlfPolicy,
    ScfPolicy,
    build_plan,
    fastest_type,
    scf_scale_supply,
)
from wfasim.state import SystemState

SYS = two_type_system(small=8, large=4, interval_s=60)


def make_state(workflows, system=SYS, budgets=(("u1", 100),)):
    state = SystemState(system, users(*budgets))
    for w in workflows:
        state.arrive(w)
    return state


def view_for(state, budget, now=0, seed=0, system=SYS):
    return PolicyView(
        now=now,
        tick=now // system.interval_s,
        user=UserConfig("u1", budget),
        config=system,
        state=state,
        oracle=perfect_oracle,
        rng=random.Random(seed),
    )


# -- fastest type ------------------------------------------------------------------


def test_fastest_type_picks_smallest_runtime():
    task = TaskSpec("t", {"small": 4, "large": 2})
    assert fastest_type(task, SYS.types, perfect_oracle).id == "large"


def test_fastest_type_tie_goes_to_cheaper():
    task = TaskSpec("t", {"small": 3, "large": 3})
    assert fastest_type(task, SYS.types, perfect_oracle).id == "small"


def test_fastest_type_full_tie_goes_to_config_order():
    types = (ResourceType("a", 2), ResourceType("b", 2))
    task = TaskSpec("t", {"a": 3, "b": 3})
    assert fastest_type(task, types, perfect_oracle).id == "a"


# -- planner ----------------------------------------------------------------------


def test_typed_tasks_chain_on_one_resource():
    w = wf("w1", [("a", {"small": 20, "large": 20}),
                  ("b", {"small": 20, "large": 20})])
    state = make_state([w])
    r = state.resources[0]
    state.reserve(r, "u1", now=0)
    plan = build_plan(
        state, "u1", now=0, horizon_s=60, oracle=perfect_oracle,
        workflow_order=["w1"],
        typed={("w1", "a"): "small", ("w1", "b"): "small"},
        extra_resources=[],
    )
    by_task = {(e.wf_id, e.task_id): e for e in plan.entries()}
    assert by_task[("w1", "a")].start_s == 0
    assert by_task[("w1", "a")].end_s == 20
    assert by_task[("w1", "b")].start_s == 20
    assert by_task[("w1", "b")].resource_id == r.id


def test_planner_horizon_cutoff():
    w = wf("w1", [(f"t{i}", {"small": 30, "large": 30}) for i in range(3)])
    state = make_state([w])
    state.reserve(state.resources[0], "u1", now=0)
    plan = build_plan(state, "u1", 0, 60, perfect_oracle, ["w1"], {}, [])
    starts = sorted(e.start_s for e in plan.entries())
    # third task would start at 60, the horizon: not planned
    assert starts == [0, 30]


def test_planner_respects_precedence():
    w = chain_wf("w1", [{"small": 10, "large": 10}, {"small": 10, "large": 10}])
    state = make_state([w])
    state.reserve(state.resources[0], "u1", now=0)
    state.reserve(state.resources[1], "u1", now=0)
    plan = build_plan(state, "u1", 0, 60, perfect_oracle, ["w1"], {}, [])
    by_task = {(e.wf_id, e.task_id): e for e in plan.entries()}
    # the child cannot start before its parent ends, even on the idle twin
    assert by_task[("w1", "t1")].start_s >= by_task[("w1", "t0")].end_s


def test_planner_pins_running_tasks():
    w = chain_wf("w1", [{"small": 25, "large": 25}, {"small": 10, "large": 10}])
    state = make_state([w])
    r = state.resources[0]
    state.reserve(r, "u1", now=0)
    state.start_task("w1", "t0", r, now=0)
    plan = build_plan(state, "u1", now=10, horizon_s=70, oracle=perfect_oracle,
                      workflow_order=["w1"], typed={}, extra_resources=[])
    by_task = {(e.wf_id, e.task_id): e for e in plan.entries()}
    pinned = by_task[("w1", "t0")]
    assert pinned.pinned
    assert (pinned.start_s, pinned.end_s) == (0, 25)
    assert by_task[("w1", "t1")].start_s == 25


def test_planner_uses_extra_resources_after_boot_delay():
    system = two_type_system(boot_delay_s=15)
    w = wf("w1", [("a", {"small": 10, "large": 10})])
    state = make_state([w], system=system)
    plan = build_plan(state, "u1", now=0, horizon_s=60, oracle=perfect_oracle,
                      workflow_order=["w1"], typed={},
                      extra_resources=[(0, "small")])
    entry = plan.entries()[0]
    assert entry.start_s == 15


def test_typed_task_with_absent_type_planned_in_second_phase():
    w = wf("w1", [("a", {"small": 10, "large": 4})])
    state = make_state([w])
    state.reserve(state.resources[0], "u1", now=0)  # a small machine
    plan = build_plan(state, "u1", 0, 60, perfect_oracle, ["w1"],
                      typed={("w1", "a"): "large"}, extra_resources=[])
    entry = plan.entries()[0]
    assert entry.resource_id == 0
    assert entry.end_s - entry.start_s == 10  # ran on small after all


def test_planner_places_on_earliest_available_lowest_id():
    w = wf("w1", [("a", {"small": 10, "large": 10})])
    state = make_state([w])
    state.reserve(state.resources[2], "u1", now=0)
    state.reserve(state.resources[1], "u1", now=0)
    plan = build_plan(state, "u1", 0, 60, perfect_oracle, ["w1"], {}, [])
    assert plan.entries()[0].resource_id == 1


# -- budget-per-workflow policy ------------------------------------------------------


def test_single_task_buys_the_fastest_type():
    # task runs 4 s on small, 2 s on large; budget 5 affords the large
    w = wf("w1", [("a", {"small": 4, "large": 2})])
    state = make_state([w])
    decision = PlfPolicy().decide(view_for(state, budget=5))
    assert list(decision.alloc) == ["large"]
    assert len(decision.alloc["large"]) == 1
    entry = decision.plan.entries()[0]
    assert entry.end_s - entry.start_s == 2


def test_unaffordable_fastest_type_is_skipped_not_downgraded():
    # budget 4 cannot buy the large; the policy skips rather than placing
    # the task on a slower affordable type
    w = wf("w1", [("a", {"small": 4, "large": 2})])
    state = make_state([w])
    decision = PlfPolicy().decide(view_for(state, budget=4))
    assert decision.alloc == {}
    assert len(decision.plan) == 0
    assert decision.diagnostics["typed"] == 0


def test_runtime_tie_buys_the_cheaper_type():
    w = wf("w1", [("a", {"small": 3, "large": 3})])
    state = make_state([w])
    decision = PlfPolicy().decide(view_for(state, budget=5))
    assert list(decision.alloc) == ["small"]


def test_priority_proportional_shares():
    # remaining 9 split 2:1 gives 6 and 3; the large (5) fits only the first
    wa = wf("wa", [("a", {"small": 10, "large": 2})], priority=2)
    wb = wf("wb", [("a", {"small": 10, "large": 2})], priority=1)
    state = make_state([wa, wb])
    decision = PlfPolicy().decide(view_for(state, budget=9))
    assert decision.diagnostics["typed"] == 1
    assert len(decision.alloc.get("large", [])) == 1
    # leftovers 1 + 3 = 4 cannot fund the second large
    assert decision.diagnostics["pool_left"] == 4.0


def test_leftover_pool_funds_skipped_tasks():
    # shares 8 and 2: the low-priority workflow alone cannot afford a large,
    # but the pooled leftover 7 + 2 can
    wa = wf("wa", [("a", {"small": 1, "large": 1})], priority=4)
    wb = wf("wb", [("a", {"small": 10, "large": 2})], priority=1)
    state = make_state([wa, wb])
    decision = PlfPolicy().decide(view_for(state, budget=10))
    assert decision.diagnostics["typed"] == 2
    assert len(decision.alloc.get("small", [])) == 1  # wa's tie goes cheap
    assert len(decision.alloc.get("large", [])) == 1


def test_equal_split_when_all_priorities_zero():
    wa = wf("wa", [("a", {"small": 2, "large": 2})], priority=0)
    wb = wf("wb", [("a", {"small": 2, "large": 2})], priority=0)
    state = make_state([wa, wb])
    decision = PlfPolicy().decide(view_for(state, budget=10))
    assert decision.diagnostics["typed"] == 2


def test_overcommitted_reservations_raise():
    w = wf("w1", [("a", {"small": 4, "large": 2})])
    state = make_state([w])
    large = next(r for r in state.resources if r.rtype.id == "large")
    state.reserve(large, "u1", now=0)
    with pytest.raises(OverCommitted):
        PlfPolicy().decide(view_for(state, budget=4))


def test_idle_at_billing_end_released_when_plan_is_empty():
    state = make_state([])
    r = state.resources[0]
    state.reserve(r, "u1", now=0)
    decision = PlfPolicy().decide(view_for(state, budget=10, now=60))
    assert decision.dealloc == [r.id]


def test_idle_with_planned_work_is_kept():
    w = wf("w1", [("a", {"small": 4, "large": 4})])
    state = make_state([w])
    r = state.resources[0]
    state.reserve(r, "u1", now=0)
    decision = PlfPolicy().decide(view_for(state, budget=10, now=60))
    assert decision.dealloc == []
    assert decision.plan.has_tasks(r.id)


def test_purchases_clamped_by_free_capacity():
    # nine one-task workflows want nine smalls; only eight exist
    wfs = [wf(f"w{i}", [("a", {"small": 1, "large": 9})]) for i in range(9)]
    state = make_state(wfs)
    decision = PlfPolicy().decide(view_for(state, budget=20))
    assert len(decision.alloc["small"]) == 8


# -- plan-scaling policy -------------------------------------------------------------


def test_scale_supply_stretches_into_leftover_budget():
    # frozen example: (2, 2) at budget 24 stretches round-robin to (4, 4)
    got = scf_scale_supply({"small": 2, "large": 2}, SYS.types, budget=24)
    assert got == {"small": 4, "large": 4}
    assert sum(got[t.id] * t.cost for t in SYS.types) == 24


def test_scale_supply_shrinks_proportionally():
    # frozen example: (4, 4) costs 24 against budget 12: factor 1/2
    got = scf_scale_supply({"small": 4, "large": 4}, SYS.types, budget=12)
    assert got == {"small": 2, "large": 2}


def test_scale_supply_leftover_spent_only_on_predicted_types():
    got = scf_scale_supply({"small": 0, "large": 2}, SYS.types, budget=24)
    assert got == {"small": 0, "large": 4}


def test_scale_supply_zero_prediction_stays_zero():
    got = scf_scale_supply({"small": 0, "large": 0}, SYS.types, budget=24)
    assert got == {"small": 0, "large": 0}


def test_supply_counts_fastest_type_runtime_per_workflow():
    # two 30 s tasks on their fastest type (small) sum to one interval
    w = chain_wf("w1", [{"small": 30, "large": 40}, {"small": 30, "large": 40}])
    state = make_state([w])
    decision = ScfPolicy().decide(view_for(state, budget=12))
    assert decision.diagnostics["supply"] == {"small": 1, "large": 0}


def test_supply_rounds_up_per_workflow():
    # 61 s of small work needs two intervals' worth of machines
    w = wf("w1", [("a", {"small": 61, "large": 90})])
    state = make_state([w])
    decision = ScfPolicy().decide(view_for(state, budget=12))
    assert decision.diagnostics["supply"]["small"] == 2


def test_running_task_counted_at_actual_type_and_remaining_time():
    w = wf("w1", [("a", {"small": 90, "large": 50})])
    state = make_state([w])
    large = next(r for r in state.resources if r.rtype.id == "large")
    state.reserve(large, "u1", now=0)
    state.start_task("w1", "a", large, now=0)
    decision = ScfPolicy().decide(view_for(state, budget=12, now=30))
    # 20 s left on the large it actually occupies
    assert decision.diagnostics["supply"] == {"small": 0, "large": 1}


def test_scf_allocates_only_the_shortfall():
    w = wf("w1", [("a", {"small": 30, "large": 50})])
    state = make_state([w])
    state.reserve(state.resources[0], "u1", now=0)  # already one small
    decision = ScfPolicy().decide(view_for(state, budget=1))
    assert decision.alloc == {}  # scaled (1 small) minus allocated (1) = 0


def test_scf_plan_orders_workflows_by_priority():
    wa = wf("wa", [("a", {"small": 10, "large": 10})], priority=1)
    wb = wf("wb", [("a", {"small": 10, "large": 10})], priority=8)
    state = make_state([wa, wb])
    state.reserve(state.resources[0], "u1", now=0)
    decision = ScfPolicy().decide(view_for(state, budget=1))
    entries = sorted(decision.plan.entries(), key=lambda e: e.start_s)
    assert entries[0].wf_id == "wb"  # higher priority first


def test_scf_overcommitted_raises():
    state = make_state([wf("w1", [("a", {"small": 1, "large": 1})])])
    large = next(r for r in state.resources if r.rtype.id == "large")
    state.reserve(large, "u1", now=0)
    with pytest.raises(OverCommitted):
        ScfPolicy().decide(view_for(state, budget=4))
