"""Domain model for budget-constrained autoscaling simulations.

Time is integer seconds throughout. Currency is integer units per billing
interval. A workload is a list of workflows; each workflow is a DAG of tasks
with one runtime per resource type.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping


class ModelError(Exception):
    """Base class for model-level errors."""


class WorkloadInvalid(ModelError):
    """A workflow failed structural validation."""

    def __init__(self, workflow_id: str, issues: list[str]):
        self.workflow_id = workflow_id
        self.issues = issues
        super().__init__(f"workflow {workflow_id!r}: {'; '.join(issues)}")


class ZeroIdealMakespan(ModelError):
    """A workflow has no positive-length critical path."""


class BudgetTooSmall(ModelError):
    """A per-interval budget cannot reserve even one instance of some type."""


class OverCommitted(ModelError):
    """Reserved cost already exceeds the user's per-interval budget."""


class BudgetViolation(ModelError):
    """Hard invariant failure: charged cost exceeded a user's budget."""


class CapacityExceeded(ModelError):
    """An allocation request exceeded the configured type capacity."""


@dataclass(frozen=True, slots=True)
class ResourceType:
    """A reservable machine class with a fixed per-interval price."""

    id: str
    cost: int

    def __post_init__(self) -> None:
        if self.cost <= 0:
            raise ValueError(f"resource type {self.id!r}: cost must be positive")


@dataclass(frozen=True)
class TaskSpec:
    """One task: an id plus its runtime in seconds on each resource type."""

    id: str
    runtime_by_type: Mapping[str, int]

    def __post_init__(self) -> None:
        for rtype, seconds in self.runtime_by_type.items():
            if not isinstance(seconds, int) or seconds < 1:
                raise ValueError(
                    f"task {self.id!r}: runtime on {rtype!r} must be an int >= 1"
                )


@dataclass(frozen=True)
class WorkflowSpec:
    """A DAG workflow owned by one user.

    ``edges`` lists (parent, child) pairs by task id. ``priority`` runs 0..9
    with 9 most important. ``arrival_s`` is the submission time in seconds.
    """

    id: str
    user: str
    priority: int
    arrival_s: int
    tasks: tuple[TaskSpec, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        if not 0 <= self.priority <= 9:
            raise ValueError(f"workflow {self.id!r}: priority must be in 0..9")
        if self.arrival_s < 0:
            raise ValueError(f"workflow {self.id!r}: arrival must be >= 0")

    def task_map(self) -> dict[str, TaskSpec]:
        return {t.id: t for t in self.tasks}


@dataclass(frozen=True)
class UserConfig:
    """Per-user autoscaling constraint: budget per billing interval."""

    id: str
    budget: int

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ValueError(f"user {self.id!r}: budget must be >= 0")


@dataclass(frozen=True)
class SystemConfig:
    """Static system description shared by all policies.

    The billing period equals the autoscaling interval; resources are charged
    per interval from the moment they are reserved, booting time included.
    """

    types: tuple[ResourceType, ...]
    capacity: Mapping[str, int]
    interval_s: int
    boot_delay_s: int = 0

    def __post_init__(self) -> None:
        if self.interval_s <= 0:
            raise ValueError("autoscaling interval must be positive")
        if self.boot_delay_s < 0:
            raise ValueError("boot delay must be >= 0")
        ids = [t.id for t in self.types]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate resource type ids")
        for tid in ids:
            if self.capacity.get(tid, 0) < 0:
                raise ValueError(f"capacity for {tid!r} must be >= 0")
        for key in self.capacity:
            if key not in ids:
                raise ValueError(f"capacity references unknown type {key!r}")

    def type_by_id(self, tid: str) -> ResourceType:
        for t in self.types:
            if t.id == tid:
                return t
        raise KeyError(tid)

    def total_capacity(self) -> int:
        return sum(self.capacity.get(t.id, 0) for t in self.types)

    def max_interval_cost(self) -> int:
        """Cost of reserving every configured resource for one interval."""
        return sum(t.cost * self.capacity.get(t.id, 0) for t in self.types)


class ResourceState(Enum):
    DOWN = "down"
    BOOTING = "booting"
    IDLE = "idle"
    BUSY = "busy"


@dataclass
class Resource:
    """A single reservable machine slot.

    State machine: Down -> Booting -> Idle <-> Busy, and Idle -> Down only at
    a billing boundary. ``billing_end_s`` is the end of the current paid
    interval while reserved.
    """

    id: int
    rtype: ResourceType
    state: ResourceState = ResourceState.DOWN
    user: str | None = None
    billing_end_s: int | None = None
    boot_ready_s: int | None = None
    idle_since_s: int | None = None
    running: tuple[str, str] | None = None  # (workflow id, task id)

    @property
    def reserved(self) -> bool:
        return self.state is not ResourceState.DOWN


class TaskStatus(Enum):
    PENDING = "pending"
    ELIGIBLE = "eligible"
    RUNNING = "running"
    FINISHED = "finished"


def min_runtime(task: TaskSpec) -> int:
    """Fastest runtime of a task across all resource types."""
    return min(task.runtime_by_type.values())


# --------------------------------------------------------------------------
# Workload interchange format
# --------------------------------------------------------------------------

def workflow_to_dict(spec: WorkflowSpec) -> dict:
    return {
        "id": spec.id,
        "user": spec.user,
        "priority": spec.priority,
        "arrival_s": spec.arrival_s,
        "tasks": [
            {"id": t.id, "runtimes": dict(t.runtime_by_type)} for t in spec.tasks
        ],
        "edges": [[p, c] for p, c in spec.edges],
    }


def workflow_from_dict(data: Mapping) -> WorkflowSpec:
    tasks = tuple(
        TaskSpec(id=t["id"], runtime_by_type={k: int(v) for k, v in t["runtimes"].items()})
        for t in data["tasks"]
    )
    edges = tuple((p, c) for p, c in data["edges"])
    return WorkflowSpec(
        id=data["id"],
        user=data["user"],
        priority=int(data["priority"]),
        arrival_s=int(data["arrival_s"]),
        tasks=tasks,
        edges=edges,
    )


def save_workload(workflows: Iterable[WorkflowSpec], path: str | Path) -> None:
    payload = {"workflows": [workflow_to_dict(w) for w in workflows]}
    Path(path).write_text(json.dumps(payload, indent=1) + "\n")


def load_workload(path: str | Path) -> list[WorkflowSpec]:
    payload = json.loads(Path(path).read_text())
    return [workflow_from_dict(w) for w in payload["workflows"]]


__all__ = [
    "BudgetTooSmall",
    "BudgetViolation",
    "CapacityExceeded",
    "Fraction",
    "ModelError",
    "OverCommitted",
    "Resource",
    "ResourceState",
    "ResourceType",
    "SystemConfig",
    "TaskSpec",
    "TaskStatus",
    "UserConfig",
    "WorkflowSpec",
    "WorkloadInvalid",
    "ZeroIdealMakespan",
    "load_workload",
    "min_runtime",
    "save_workload",
    "workflow_from_dict",
    "workflow_to_dict",
]
