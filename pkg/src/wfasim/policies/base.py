"""Shared policy interfaces: decisions, execution plans, observation views."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

from ..model import SystemConfig, TaskSpec, UserConfig

if TYPE_CHECKING:
    from ..state import SystemState
    from .pfa import PfaObservation

# Perfect runtime estimates: the oracle returns the workload's true runtime.
RuntimeOracle = Callable[[TaskSpec, str], int]


def perfect_oracle(task: TaskSpec, rtype_id: str) -> int:
    return task.runtime_by_type[rtype_id]


@dataclass(frozen=True)
class PlanEntry:
    """One planned placement: a task occupies a resource for [start, end)."""

    resource_id: int
    wf_id: str
    task_id: str
    start_s: int
    end_s: int
    pinned: bool = False  # already running when the plan was built


class ExecutionPlan:
    """Per-resource timelines of planned task placements."""

    def __init__(self) -> None:
        self.by_resource: dict[int, list[PlanEntry]] = {}
        self.by_task: dict[tuple[str, str], PlanEntry] = {}

    def add(self, entry: PlanEntry) -> None:
        ref = (entry.wf_id, entry.task_id)
        if ref in self.by_task:
            raise ValueError(f"task {ref} planned twice")
        timeline = self.by_resource.setdefault(entry.resource_id, [])
        if timeline and entry.start_s < timeline[-1].end_s:
            raise ValueError(f"overlap on resource {entry.resource_id}")
        timeline.append(entry)
        self.by_task[ref] = entry

    def available_from(self, resource_id: int, default: int) -> int:
        timeline = self.by_resource.get(resource_id)
        return timeline[-1].end_s if timeline else default

    def has_tasks(self, resource_id: int) -> bool:
        return bool(self.by_resource.get(resource_id))

    def entries(self) -> list[PlanEntry]:
        out: list[PlanEntry] = []
        for rid in sorted(self.by_resource):
            out.extend(self.by_resource[rid])
        return out

    def __len__(self) -> int:
        return len(self.by_task)


@dataclass
class Decision:
    """What a policy wants applied at a tick.

    ``alloc`` maps resource type id to the exact free resource ids to
    reserve; ``dealloc`` lists idle resources to release at their billing
    end. Plan-following policies also ship the next interval's plan.
    """

    alloc: dict[str, list[int]] = field(default_factory=dict)
    dealloc: list[int] = field(default_factory=list)
    plan: ExecutionPlan | None = None
    diagnostics: dict | None = None
    step_seconds: dict[str, float] = field(default_factory=dict)

    def allocation_count(self) -> int:
        return sum(len(ids) for ids in self.alloc.values())


@dataclass
class PolicyView:
    """Everything the engine exposes to one policy invocation."""

    now: int
    tick: int
    user: UserConfig
    config: SystemConfig
    state: "SystemState"
    oracle: RuntimeOracle
    rng: random.Random
    observation: "PfaObservation | None" = None

    @property
    def horizon_s(self) -> int:
        return self.now + self.config.interval_s


class Policy:
    """Base autoscaling policy.

    ``mode`` selects the task dispatch style: "dynamic" pairs eligible tasks
    with idle resources work-conservingly; "plan" follows the decision's
    execution plan.
    """

    name = "base"
    mode = "dynamic"
    needs_observation = False

    def decide(self, view: PolicyView) -> Decision:
        raise NotImplementedError


class NonePolicy(Policy):
    """No autoscaling: keeps whatever is preallocated, never reacts."""

    name = "none"
    mode = "dynamic"

    def decide(self, view: PolicyView) -> Decision:
        return Decision()


__all__ = [
    "Decision",
    "ExecutionPlan",
    "NonePolicy",
    "PlanEntry",
    "Policy",
    "PolicyView",
    "RuntimeOracle",
    "perfect_oracle",
]
