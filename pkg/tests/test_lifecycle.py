from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import random_lifecycle_graph
from rulemine import (
    DataObjectRef,
    GraphTooLargeError,
    Node,
    NodeKind,
    Notation,
    ProcessGraph,
    RefDirection,
    RuleForm,
    UnknownStateError,
    brute_force_precedence,
    collect_lifecycles,
    derive_precedence,
    detect_state_order_rules,
    must_precede,
    render_text,
)
from rulemine.lifecycle import ORACLE_NODE_LIMIT, PrecedencePair


def act(nid, label="", outputs=()):
    refs = tuple(DataObjectRef(obj, state, RefDirection.OUTPUT)
                 for obj, state in outputs)
    return Node(nid, NodeKind.ACTIVITY, label, data_refs=refs)


def ev(nid, label=""):
    return Node(nid, NodeKind.EVENT, label)


def graph_of(nodes, edges):
    return ProcessGraph("m", Notation.NATIVE, nodes, edges)


def linear_graph(extra_nodes=(), extra_edges=()):
    nodes = [ev("e0", "go"), act("a1", "Reserve", [("Order", "draft")]),
             ev("e1"), act("a2", "Finish", [("Order", "done")])]
    edges = [("e0", "a1"), ("a1", "e1"), ("e1", "a2")]
    return graph_of(nodes + list(extra_nodes), edges + list(extra_edges))


def test_collect_lifecycles_from_output_refs():
    (lifecycle,) = collect_lifecycles(linear_graph())
    assert lifecycle.object_name == "Order"
    assert lifecycle.states == {"draft", "done"}
    assert lifecycle.producers == {"draft": {"a1"}, "done": {"a2"}}


def test_collect_lifecycles_ignores_inputs_and_stateless_refs():
    graph = graph_of([Node("a1", NodeKind.ACTIVITY, "use", data_refs=(
        DataObjectRef("Order", "draft", RefDirection.INPUT),
        DataObjectRef("Order", None, RefDirection.OUTPUT),
    ))], [])
    assert collect_lifecycles(graph) == []


def test_collect_lifecycles_reads_state_events():
    graph = graph_of(
        [act("a1", "Pack", [("Order item", "boxed")]),
         act("a2", "Sort", [("Order", "new")]),
         act("a3", "Ship"),
         ev("e1", "Order item is packed"),
         ev("e2", "Invoice is sent"),
         ev("e3", "Order is archived")],
        [("a1", "a3"), ("a3", "e1")])
    order, item = collect_lifecycles(graph)
    assert item.object_name == "Order item"
    assert item.producers == {"boxed": {"a1"}, "packed": {"a3"}}
    assert order.producers == {"new": {"a2"}}


def test_must_precede_on_a_linear_chain():
    graph = linear_graph()
    (lifecycle,) = collect_lifecycles(graph)
    assert must_precede(graph, lifecycle, "draft", "done")
    assert not must_precede(graph, lifecycle, "done", "draft")


def test_must_precede_fails_when_a_start_bypasses_the_producer():
    graph = linear_graph(extra_nodes=[ev("s2", "shortcut")],
                         extra_edges=[("s2", "e1")])
    (lifecycle,) = collect_lifecycles(graph)
    assert not must_precede(graph, lifecycle, "draft", "done")


def test_must_precede_checks_its_arguments():
    graph = linear_graph()
    (lifecycle,) = collect_lifecycles(graph)
    with pytest.raises(UnknownStateError):
        must_precede(graph, lifecycle, "draft", "shipped")
    with pytest.raises(ValueError):
        must_precede(graph, lifecycle, "draft", "draft")


def test_must_precede_treats_unreachable_producers_as_vacuous():
    graph = graph_of(
        [ev("e0", "go"), act("a1", "Reserve", [("Order", "draft")]),
         act("a_iso", "Ghost", [("Order", "done")]), ev("e_loop")],
        [("e0", "a1"), ("a_iso", "e_loop"), ("e_loop", "a_iso")])
    (lifecycle,) = collect_lifecycles(graph)
    notes: list[str] = []
    assert must_precede(graph, lifecycle, "draft", "done", notes)
    assert notes == ["producer a_iso of state 'done' is unreachable from any "
                     "start; treated as vacuously guarded"]


def test_derive_precedence_linear_pair_is_irreversible():
    graph = linear_graph()
    (lifecycle,) = collect_lifecycles(graph)
    assert derive_precedence(graph, lifecycle) == [
        PrecedencePair("Order", "draft", "done", True)]


def test_derive_precedence_loop_suppresses_prohibition():
    graph = linear_graph(extra_nodes=[ev("e_back")],
                         extra_edges=[("a2", "e_back"), ("e_back", "a1")])
    (lifecycle,) = collect_lifecycles(graph)
    notes: list[str] = []
    assert derive_precedence(graph, lifecycle, notes) == [
        PrecedencePair("Order", "draft", "done", False)]
    assert notes == [
        "state 'done' of 'Order' can return to 'draft'; "
        "prohibition rule suppressed"]


def test_derive_precedence_skips_degenerate_pairs():
    graph = graph_of(
        [ev("e0", "go"), act("a1", "Both", [("Order", "draft"),
                                            ("Order", "done")])],
        [("e0", "a1")])
    (lifecycle,) = collect_lifecycles(graph)
    notes: list[str] = []
    assert derive_precedence(graph, lifecycle, notes) == []
    assert notes == ["skipped degenerate state pair 'done'/'draft' of 'Order': "
                     "identical producers"]


def test_state_order_rules_render_both_forms():
    rules = detect_state_order_rules(linear_graph())
    assert [r.form for r in rules] == [RuleForm.STATE_ORDER_3_1,
                                       RuleForm.STATE_PROHIBITION_3_2]
    assert [render_text(r) for r in rules] == [
        "If <Order is in status done> then "
        "<it must have already passed status draft>",
        "<Order> cannot obtain status <draft> from status <done>",
    ]
    assert all(r.provenance == ("a1", "a2") for r in rules)


def test_state_order_rules_on_a_loop_keep_only_the_order_rule():
    graph = linear_graph(extra_nodes=[ev("e_back")],
                         extra_edges=[("a2", "e_back"), ("e_back", "a1")])
    rules = detect_state_order_rules(graph)
    assert [r.form for r in rules] == [RuleForm.STATE_ORDER_3_1]


def test_brute_force_rejects_large_graphs():
    nodes = [ev(f"e{i}") for i in range(ORACLE_NODE_LIMIT + 1)]
    graph = graph_of(nodes, [])
    (lifecycle,) = collect_lifecycles(linear_graph())
    with pytest.raises(GraphTooLargeError):
        brute_force_precedence(graph, lifecycle)


def test_brute_force_agrees_on_the_crafted_fixtures():
    for graph in (linear_graph(),
                  linear_graph(extra_nodes=[ev("e_back")],
                               extra_edges=[("a2", "e_back"), ("e_back", "a1")]),
                  linear_graph(extra_nodes=[ev("s2", "x")],
                               extra_edges=[("s2", "e1")])):
        for lifecycle in collect_lifecycles(graph):
            assert derive_precedence(graph, lifecycle) == (
                brute_force_precedence(graph, lifecycle))


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_both_routes_agree_on_random_graphs(seed):
    graph = random_lifecycle_graph(random.Random(seed))
    for lifecycle in collect_lifecycles(graph):
        assert derive_precedence(graph, lifecycle) == (
            brute_force_precedence(graph, lifecycle))


def _dag_version(graph: ProcessGraph) -> ProcessGraph:
    edges = [(a, b) for a, b in graph.edges if a < b]
    return ProcessGraph(graph.name, graph.notation, graph.nodes.values(), edges)


def test_precedence_is_antisymmetric_on_dags_for_disjoint_producers():
    # A producer shared by both states establishes them together, making
    # both orderings true at once, so only disjoint pairs are constrained.
    for seed in range(300):
        graph = _dag_version(random_lifecycle_graph(random.Random(seed)))
        for lifecycle in collect_lifecycles(graph):
            pairs = derive_precedence(graph, lifecycle)
            keys = {(p.earlier_state, p.later_state) for p in pairs}
            for pair in pairs:
                if (lifecycle.producers[pair.earlier_state]
                        & lifecycle.producers[pair.later_state]):
                    continue
                assert (pair.later_state, pair.earlier_state) not in keys


def test_isolated_nodes_do_not_change_precedence():
    for seed in range(200):
        graph = random_lifecycle_graph(random.Random(seed))
        padded = ProcessGraph(
            graph.name, graph.notation,
            list(graph.nodes.values()) + [ev("zz_isolated")], graph.edges)
        before = [derive_precedence(graph, lc)
                  for lc in collect_lifecycles(graph)]
        after = [derive_precedence(padded, lc)
                 for lc in collect_lifecycles(padded)]
        assert before == after


def test_every_prohibition_has_a_matching_order_rule():
    for seed in range(300):
        graph = random_lifecycle_graph(random.Random(seed))
        rules = detect_state_order_rules(graph)
        orders = {(r.antecedent_object, r.antecedent_state, r.consequent_state)
                  for r in rules if r.form is RuleForm.STATE_ORDER_3_1}
        for rule in rules:
            if rule.form is RuleForm.STATE_PROHIBITION_3_2:
                key = (rule.antecedent_object, rule.antecedent_state,
                       rule.consequent_state)
                assert key in orders
