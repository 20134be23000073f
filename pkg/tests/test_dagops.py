"""DAG validation, topology, and critical-path oracles."""

import pytest

from conftest import chain_wf, diamond_wf, wf
from wfasim.dagops import (
    WorkflowGraph,
    critical_path_length,
    ideal_makespan,
    validate_workflow,
)
from wfasim.model import min_runtime


# longest path through a DAG by exhaustive path enumeration; independent of
# the library's forward-propagation implementation
def oracle_longest_path(tasks, edges, weight):
    children = {}
    indeg = {tid: 0 for tid in tasks}
    for p, c in edges:
        children.setdefault(p, []).append(c)
        indeg[c] += 1

    def longest_from(tid):
        w = weight(tid)
        succ = children.get(tid, [])
        return w + (max(longest_from(c) for c in succ) if succ else 0)

    starts = [tid for tid, d in indeg.items() if d == 0]
    return max(longest_from(t) for t in starts)


def test_validation_accepts_well_formed_diamond():
    w = diamond_wf("w", {"small": 1}, {"small": 1}, {"small": 1}, {"small": 1})
    assert validate_workflow(w) == []


@pytest.mark.parametrize(
    "spec,code",
    [
        (wf("w", []), "EmptyWorkflow"),
        (wf("w", [("a", {"small": 1}), ("a", {"small": 2})]), "DuplicateTask"),
        (wf("w", [("a", {"small": 1})], edges=[("a", "ghost")]), "DanglingEdge"),
        (
            wf("w", [("a", {"small": 1}), ("b", {"small": 1})],
               edges=[("a", "b"), ("b", "a")]),
            "CycleDetected",
        ),
        (
            wf("w", [("a", {"small": 1}), ("b", {"small": 1}), ("c", {"small": 1})],
               edges=[("a", "c"), ("b", "c")]),
            "MultipleEntries",
        ),
        (
            wf("w", [("a", {"small": 1}), ("b", {"small": 1}), ("c", {"small": 1})],
               edges=[("a", "b"), ("a", "c")]),
            "MultipleExits",
        ),
    ],
)
def test_validation_codes(spec, code):
    issues = validate_workflow(spec)
    assert any(code in issue for issue in issues), issues


def test_topological_order_is_smallest_id_first():
    w = wf(
        "w",
        [("a", {"small": 1}), ("b", {"small": 1}), ("c", {"small": 1}),
         ("d", {"small": 1})],
        edges=[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")],
    )
    g = WorkflowGraph(w)
    assert g.topo_order == ("a", "b", "c", "d")
    assert g.topo_index == {"a": 0, "b": 1, "c": 2, "d": 3}
    assert list(g.entries()) == ["a"]
    assert list(g.exits()) == ["d"]


def test_topological_order_breaks_ties_by_id():
    w = wf(
        "w",
        [("z", {"small": 1}), ("m", {"small": 1}), ("a", {"small": 1}),
         ("end", {"small": 1})],
        edges=[("z", "m"), ("z", "a"), ("m", "end"), ("a", "end")],
    )
    g = WorkflowGraph(w)
    assert g.topo_order == ("z", "a", "m", "end")


def test_parents_children_maps():
    w = chain_wf("w", [{"small": 1}, {"small": 1}, {"small": 1}])
    g = WorkflowGraph(w)
    assert g.parents["t0"] == ()
    assert g.parents["t2"] == ("t1",)
    assert g.children["t0"] == ("t1",)
    assert g.children["t2"] == ()


def test_critical_path_of_chain():
    # chain with per-task fastest runtimes 2, 3, 5: path sum is 10
    w = chain_wf(
        "w",
        [{"small": 2, "large": 4}, {"small": 6, "large": 3}, {"small": 5, "large": 7}],
    )
    g = WorkflowGraph(w)
    got = critical_path_length(g, weight=min_runtime)
    tasks = {t.id: t for t in w.tasks}
    expect = oracle_longest_path(
        tasks, w.edges, lambda tid: min_runtime(tasks[tid])
    )
    assert expect == 10
    assert got == 10


def test_critical_path_of_diamond():
    # entry 1 + slower branch 6 + exit 4 = 11; the 4-branch is off-path
    w = diamond_wf(
        "w",
        {"small": 1}, {"small": 4}, {"small": 6}, {"small": 4},
    )
    g = WorkflowGraph(w)
    got = ideal_makespan(g)
    tasks = {t.id: t for t in w.tasks}
    expect = oracle_longest_path(tasks, w.edges, lambda tid: min_runtime(tasks[tid]))
    assert expect == 11
    assert got == 11


def test_ideal_makespan_accepts_spec_or_graph():
    w = chain_wf("w", [{"small": 2}, {"small": 3}])
    assert ideal_makespan(w) == 5
    assert ideal_makespan(WorkflowGraph(w)) == 5


def test_ideal_makespan_uses_fastest_type_per_task_independently():
    # per-task minima may come from different types
    w = chain_wf("w", [{"small": 2, "large": 9}, {"small": 9, "large": 3}])
    assert ideal_makespan(w) == 5


def test_critical_path_with_custom_weight():
    w = chain_wf("w", [{"small": 2, "large": 9}, {"small": 9, "large": 3}])
    g = WorkflowGraph(w)
    assert critical_path_length(g, weight=lambda t: t.runtime_by_type["small"]) == 11
