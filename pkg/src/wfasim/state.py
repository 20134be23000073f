"""Mutable simulation state: arrived workflows, task lifecycle, reservations.

The state object enforces the local invariants (a task starts only when
eligible, a resource runs one task, Idle -> Down only at a billing boundary);
the engine owns event ordering and billing on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dagops import WorkflowGraph
from .model import (
    CapacityExceeded,
    Resource,
    ResourceState,
    SystemConfig,
    TaskStatus,
    UserConfig,
    WorkflowSpec,
)

TaskRef = tuple[str, str]  # (workflow id, task id)


@dataclass
class WorkflowRun:
    """Execution record of one arrived workflow."""

    spec: WorkflowSpec
    graph: WorkflowGraph
    seq: int  # arrival sequence number, deterministic tie-break
    status: dict[str, TaskStatus] = field(default_factory=dict)
    blocked_parents: dict[str, int] = field(default_factory=dict)
    unfinished: int = 0
    first_start_s: int | None = None
    last_finish_s: int | None = None
    task_start_s: dict[str, int] = field(default_factory=dict)
    task_finish_s: dict[str, int] = field(default_factory=dict)
    task_resource: dict[str, int] = field(default_factory=dict)

    @property
    def done(self) -> bool:
        return self.unfinished == 0

    def order_key(self, task_id: str) -> tuple[int, int, int, int]:
        """Deterministic dispatch order: priority desc, arrival asc, then
        arrival sequence and topological index ascending."""
        return (
            -self.spec.priority,
            self.spec.arrival_s,
            self.seq,
            self.graph.topo_index[task_id],
        )


class SystemState:
    """All mutable simulation state at one instant."""

    def __init__(self, config: SystemConfig, users: list[UserConfig]):
        self.config = config
        self.users = {u.id: u for u in users}
        self.clock = 0
        self.resources: list[Resource] = []
        for rtype in config.types:
            for _ in range(config.capacity.get(rtype.id, 0)):
                self.resources.append(Resource(id=len(self.resources), rtype=rtype))
        self.runs: dict[str, WorkflowRun] = {}
        self.user_workflows: dict[str, list[str]] = {u.id: [] for u in users}
        self._running: dict[str, int] = {u.id: 0 for u in users}
        self._eligible: dict[str, set[TaskRef]] = {u.id: set() for u in users}
        self._arrival_seq = 0

    # -- workflow lifecycle -------------------------------------------------

    def arrive(self, spec: WorkflowSpec, graph: WorkflowGraph | None = None) -> WorkflowRun:
        if spec.id in self.runs:
            raise ValueError(f"workflow {spec.id!r} already arrived")
        if spec.user not in self.users:
            raise KeyError(f"unknown user {spec.user!r}")
        graph = graph or WorkflowGraph(spec)
        run = WorkflowRun(spec=spec, graph=graph, seq=self._arrival_seq)
        self._arrival_seq += 1
        run.unfinished = len(spec.tasks)
        for tid in graph.topo_order:
            blocked = len(graph.parents[tid])
            run.blocked_parents[tid] = blocked
            if blocked == 0:
                run.status[tid] = TaskStatus.ELIGIBLE
                self._eligible[spec.user].add((spec.id, tid))
            else:
                run.status[tid] = TaskStatus.PENDING
        self.runs[spec.id] = run
        self.user_workflows[spec.user].append(spec.id)
        return run

    def start_task(self, wf_id: str, task_id: str, resource: Resource, now: int) -> None:
        run = self.runs[wf_id]
        if run.status[task_id] is not TaskStatus.ELIGIBLE:
            raise ValueError(f"task {wf_id}/{task_id} not eligible")
        if resource.state is not ResourceState.IDLE or resource.user != run.spec.user:
            raise ValueError(f"resource {resource.id} not idle for {run.spec.user}")
        run.status[task_id] = TaskStatus.RUNNING
        run.task_start_s[task_id] = now
        run.task_resource[task_id] = resource.id
        if run.first_start_s is None:
            run.first_start_s = now
        self._eligible[run.spec.user].discard((wf_id, task_id))
        self._running[run.spec.user] += 1
        resource.state = ResourceState.BUSY
        resource.running = (wf_id, task_id)
        resource.idle_since_s = None

    def finish_task(self, wf_id: str, task_id: str, now: int) -> list[TaskRef]:
        """Complete a running task; returns task refs that became eligible."""
        run = self.runs[wf_id]
        if run.status[task_id] is not TaskStatus.RUNNING:
            raise ValueError(f"task {wf_id}/{task_id} not running")
        run.status[task_id] = TaskStatus.FINISHED
        run.task_finish_s[task_id] = now
        run.unfinished -= 1
        if run.unfinished == 0:
            run.last_finish_s = now
        self._running[run.spec.user] -= 1
        resource = self.resources[run.task_resource[task_id]]
        resource.state = ResourceState.IDLE
        resource.running = None
        resource.idle_since_s = now
        freed: list[TaskRef] = []
        for child in run.graph.children[task_id]:
            run.blocked_parents[child] -= 1
            if run.blocked_parents[child] == 0:
                run.status[child] = TaskStatus.ELIGIBLE
                self._eligible[run.spec.user].add((wf_id, child))
                freed.append((wf_id, child))
        return freed

    # -- queries ------------------------------------------------------------

    def eligible_tasks(self, user: str) -> list[TaskRef]:
        """Eligible tasks of a user in deterministic dispatch order."""
        refs = self._eligible[user]
        return sorted(refs, key=lambda ref: self.runs[ref[0]].order_key(ref[1]))

    def momentary_demand(self, user: str) -> int:
        """Running plus eligible task count: work the user could use now."""
        return self._running[user] + len(self._eligible[user])

    def running_count(self, user: str) -> int:
        return self._running[user]

    def supply(self, user: str) -> int:
        return sum(1 for r in self.resources if r.reserved and r.user == user)

    def busy_count(self, user: str) -> int:
        return sum(
            1
            for r in self.resources
            if r.state is ResourceState.BUSY and r.user == user
        )

    def allocated_cost(self, user: str) -> int:
        return sum(r.rtype.cost for r in self.resources if r.reserved and r.user == user)

    def counts_by_type(self, user: str) -> dict[str, dict[str, int]]:
        """Per-type reservation breakdown for one user.

        Returns {type id: {"allocated": n, "idle": n, "busy": n, "booting": n}}.
        """
        out = {
            t.id: {"allocated": 0, "idle": 0, "busy": 0, "booting": 0}
            for t in self.config.types
        }
        for r in self.resources:
            if not r.reserved or r.user != user:
                continue
            row = out[r.rtype.id]
            row["allocated"] += 1
            if r.state is ResourceState.IDLE:
                row["idle"] += 1
            elif r.state is ResourceState.BUSY:
                row["busy"] += 1
            elif r.state is ResourceState.BOOTING:
                row["booting"] += 1
        return out

    def free_resources(self, rtype_id: str) -> list[Resource]:
        """Unreserved resources of one type, lowest id first."""
        return [
            r
            for r in self.resources
            if r.state is ResourceState.DOWN and r.rtype.id == rtype_id
        ]

    def idle_resources(self, user: str, rtype_id: str | None = None) -> list[Resource]:
        return [
            r
            for r in self.resources
            if r.state is ResourceState.IDLE
            and r.user == user
            and (rtype_id is None or r.rtype.id == rtype_id)
        ]

    def user_resources(self, user: str) -> list[Resource]:
        return [r for r in self.resources if r.reserved and r.user == user]

    def joint_dag(self, user: str) -> tuple[list[TaskRef], list[tuple[TaskRef, TaskRef]]]:
        """Unfinished tasks of the user's arrived workflows, with the
        precedence edges among them, as one combined DAG.

        Node and edge order is deterministic (arrival sequence, then
        topological index).
        """
        nodes: list[TaskRef] = []
        edges: list[tuple[TaskRef, TaskRef]] = []
        for wf_id in self.user_workflows[user]:
            run = self.runs[wf_id]
            if run.done:
                continue
            for tid in run.graph.topo_order:
                if run.status[tid] is TaskStatus.FINISHED:
                    continue
                nodes.append((wf_id, tid))
                for child in run.graph.children[tid]:
                    edges.append(((wf_id, tid), (wf_id, child)))
        return nodes, edges

    # -- reservations -------------------------------------------------------

    def reserve(self, resource: Resource, user: str, now: int) -> None:
        if resource.state is not ResourceState.DOWN:
            raise CapacityExceeded(f"resource {resource.id} is not free")
        resource.user = user
        resource.billing_end_s = now + self.config.interval_s
        if self.config.boot_delay_s > 0:
            resource.state = ResourceState.BOOTING
            resource.boot_ready_s = now + self.config.boot_delay_s
            resource.idle_since_s = None
        else:
            resource.state = ResourceState.IDLE
            resource.boot_ready_s = now
            resource.idle_since_s = now

    def boot_complete(self, resource: Resource, now: int) -> None:
        if resource.state is ResourceState.BOOTING:
            resource.state = ResourceState.IDLE
            resource.idle_since_s = now

    def release(self, resource: Resource, now: int) -> None:
        """Deallocate an idle resource at its billing boundary."""
        if resource.state is not ResourceState.IDLE:
            raise ValueError(f"resource {resource.id} not idle")
        if resource.billing_end_s is None or resource.billing_end_s > now:
            raise ValueError(
                f"resource {resource.id} released before its billing end"
            )
        resource.state = ResourceState.DOWN
        resource.user = None
        resource.billing_end_s = None
        resource.boot_ready_s = None
        resource.idle_since_s = None
        resource.running = None

    def prolong(self, resource: Resource, now: int) -> None:
        """Extend a reservation one more billing interval."""
        if not resource.reserved:
            raise ValueError(f"resource {resource.id} not reserved")
        if resource.billing_end_s is not None and resource.billing_end_s <= now:
            resource.billing_end_s = now + self.config.interval_s

    @property
    def all_done(self) -> bool:
        return all(run.done for run in self.runs.values())


__all__ = ["SystemState", "TaskRef", "WorkflowRun"]
