"""Shared builders for test workloads and systems."""

from __future__ import annotations

from wfasim.model import ResourceType, SystemConfig, TaskSpec, UserConfig, WorkflowSpec

SMALL = ResourceType("small", 1)
LARGE = ResourceType("large", 5)


def two_type_system(small=8, large=8, interval_s=60, boot_delay_s=0) -> SystemConfig:
    return SystemConfig(
        types=(SMALL, LARGE),
        capacity={"small": small, "large": large},
        interval_s=interval_s,
        boot_delay_s=boot_delay_s,
    )


def small_only_system(count=4, interval_s=60, boot_delay_s=0) -> SystemConfig:
    return SystemConfig(
        types=(SMALL,),
        capacity={"small": count},
        interval_s=interval_s,
        boot_delay_s=boot_delay_s,
    )


def wf(wf_id, tasks, edges=(), user="u1", priority=5, arrival_s=0) -> WorkflowSpec:
    """tasks: list of (task_id, {type: runtime}) pairs."""
    specs = tuple(TaskSpec(tid, dict(rts)) for tid, rts in tasks)
    return WorkflowSpec(
        wf_id, user, priority, arrival_s, specs, tuple(tuple(e) for e in edges)
    )


def chain_wf(wf_id, runtimes, **kw) -> WorkflowSpec:
    """A linear chain; runtimes is a list of {type: seconds} dicts."""
    tasks = [(f"t{i}", dict(r)) for i, r in enumerate(runtimes)]
    edges = [(f"t{i}", f"t{i+1}") for i in range(len(runtimes) - 1)]
    return wf(wf_id, tasks, edges, **kw)


def diamond_wf(wf_id, entry, left, right, exit_, **kw) -> WorkflowSpec:
    tasks = [("a", entry), ("b", left), ("c", right), ("d", exit_)]
    edges = [("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]
    return wf(wf_id, tasks, edges, **kw)


def users(*pairs) -> list[UserConfig]:
    return [UserConfig(uid, budget) for uid, budget in pairs]
