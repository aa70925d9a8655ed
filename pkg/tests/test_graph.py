from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rulemine import (
    ConnectorRole,
    ConnectorType,
    DataObjectRef,
    Direction,
    DuplicateIdError,
    Node,
    NodeKind,
    Notation,
    ProcessGraph,
    UnknownNodeError,
    WrongNotationError,
    neighbors,
    normalize_petri,
    path_exists,
    validate,
)


def g(nodes, edges, notation=Notation.NATIVE, name="g"):
    return ProcessGraph(name, notation, nodes, edges)


def chain(*kinds: NodeKind) -> ProcessGraph:
    nodes = [Node(f"n{i}", kind, f"L{i}") for i, kind in enumerate(kinds)]
    edges = [(f"n{i}", f"n{i + 1}") for i in range(len(kinds) - 1)]
    return g(nodes, edges)


def test_duplicate_node_id_rejected():
    with pytest.raises(DuplicateIdError):
        g([Node("a", NodeKind.EVENT), Node("a", NodeKind.ACTIVITY)], [])


def test_adjacency_is_sorted_and_deduplicated():
    graph = g([Node("a", NodeKind.EVENT), Node("b", NodeKind.ACTIVITY),
               Node("c", NodeKind.EVENT)],
              [("a", "c"), ("a", "b"), ("a", "b")])
    assert graph.successors("a") == ["b", "c"]
    assert graph.out_degree("a") == 2
    assert graph.predecessors("b") == ["a"]
    assert graph.in_degree("b") == 1


def test_start_and_end_nodes_derived_from_degrees():
    graph = chain(NodeKind.EVENT, NodeKind.ACTIVITY, NodeKind.EVENT)
    assert graph.start_nodes() == ["n0"]
    assert graph.end_nodes() == ["n2"]


def test_dangling_edges_stay_out_of_adjacency():
    graph = g([Node("a", NodeKind.EVENT)], [("a", "ghost"), ("ghost", "a")])
    assert graph.successors("a") == []
    assert graph.predecessors("a") == []
    assert ("a", "ghost") in graph.edges


def test_node_lookup_unknown_id():
    graph = chain(NodeKind.EVENT)
    with pytest.raises(UnknownNodeError):
        graph.node("missing")


def test_neighbors_by_direction():
    graph = chain(NodeKind.EVENT, NodeKind.ACTIVITY, NodeKind.EVENT)
    assert neighbors(graph, "n1", Direction.FORWARD) == ["n2"]
    assert neighbors(graph, "n1", Direction.BACKWARD) == ["n0"]
    with pytest.raises(UnknownNodeError):
        neighbors(graph, "missing", Direction.FORWARD)


def test_path_exists_basics():
    graph = chain(NodeKind.EVENT, NodeKind.ACTIVITY, NodeKind.EVENT)
    assert path_exists(graph, "n0", "n2")
    assert not path_exists(graph, "n2", "n0")
    assert path_exists(graph, "n1", "n1")


def test_path_exists_respects_exclusions():
    graph = chain(NodeKind.EVENT, NodeKind.ACTIVITY, NodeKind.EVENT)
    assert not path_exists(graph, "n0", "n2", excluding={"n1"})
    assert not path_exists(graph, "n0", "n2", excluding={"n0"})
    assert not path_exists(graph, "n0", "n2", excluding={"n2"})
    assert not path_exists(graph, "n1", "n1", excluding={"n1"})


def test_path_exists_handles_cycles():
    graph = g([Node("a", NodeKind.EVENT), Node("b", NodeKind.ACTIVITY)],
              [("a", "b"), ("b", "a")])
    assert path_exists(graph, "b", "a")
    assert path_exists(graph, "a", "a")


def test_validate_accepts_clean_graph():
    graph = chain(NodeKind.EVENT, NodeKind.ACTIVITY, NodeKind.EVENT)
    report = validate(graph)
    assert report.ok()
    assert report.warnings == []


def split(cid: str, ctype=ConnectorType.XOR, role=ConnectorRole.SPLIT) -> Node:
    return Node(cid, NodeKind.CONNECTOR, connector_type=ctype, connector_role=role)


def test_validate_flags_empty_node_id():
    report = validate(g([Node("", NodeKind.EVENT)], []))
    assert [i.code for i in report.errors] == ["EMPTY_NODE_ID"]


def test_validate_flags_connector_field_misuse():
    incomplete = Node("c", NodeKind.CONNECTOR, connector_type=ConnectorType.AND)
    report = validate(g([incomplete], []))
    assert "CONNECTOR_FIELDS" in [i.code for i in report.errors]

    decorated = Node("e", NodeKind.EVENT, connector_role=ConnectorRole.JOIN)
    report = validate(g([decorated], []))
    assert "CONNECTOR_FIELDS" in [i.code for i in report.errors]


def test_validate_flags_activity_fields_on_other_kinds():
    event = Node("e", NodeKind.EVENT, data_refs=(DataObjectRef("Order"),))
    report = validate(g([event], []))
    assert "ACTIVITY_FIELDS" in [i.code for i in report.errors]


def test_validate_flags_bad_data_refs_and_roles():
    nameless = Node("a", NodeKind.ACTIVITY, data_refs=(DataObjectRef(""),))
    assert "DATA_REF_FIELDS" in [i.code for i in validate(g([nameless], [])).errors]

    stateless = Node("a", NodeKind.ACTIVITY,
                     data_refs=(DataObjectRef("Order", state=""),))
    assert "DATA_REF_FIELDS" in [i.code for i in validate(g([stateless], [])).errors]

    unnamed_role = Node("a", NodeKind.ACTIVITY, roles=("",))
    assert "ACTIVITY_FIELDS" in [i.code for i in validate(g([unnamed_role], [])).errors]


def test_validate_flags_dangling_and_duplicate_edges():
    graph = g([Node("a", NodeKind.EVENT), Node("b", NodeKind.ACTIVITY)],
              [("a", "b"), ("a", "b"), ("a", "ghost")])
    codes = [i.code for i in validate(graph).errors]
    assert codes.count("DUPLICATE_EDGE") == 1
    assert codes.count("DANGLING_EDGE") == 1


def test_validate_checks_connector_arity():
    lonely_split = g([split("c"), Node("a", NodeKind.EVENT),
                      Node("b", NodeKind.EVENT)],
                     [("a", "c"), ("c", "b")])
    assert "CONNECTOR_ARITY" in [i.code for i in validate(lonely_split).errors]

    good_split = g([split("c"), Node("a", NodeKind.EVENT),
                    Node("b", NodeKind.EVENT), Node("d", NodeKind.EVENT)],
                   [("a", "c"), ("c", "b"), ("c", "d")])
    assert validate(good_split).ok()

    bad_join = g([split("c", role=ConnectorRole.JOIN), Node("a", NodeKind.EVENT),
                  Node("b", NodeKind.EVENT)],
                 [("a", "c"), ("c", "b")])
    assert "CONNECTOR_ARITY" in [i.code for i in validate(bad_join).errors]


def test_validate_warns_on_adjacent_activities_in_epc_only():
    nodes = [Node("f1", NodeKind.ACTIVITY, "one"), Node("f2", NodeKind.ACTIVITY, "two")]
    epc = g(nodes, [("f1", "f2")], notation=Notation.EPC)
    report = validate(epc)
    assert report.ok()
    assert [w.code for w in report.warnings] == ["ADJACENT_ACTIVITIES"]

    native = g(nodes, [("f1", "f2")], notation=Notation.NATIVE)
    assert validate(native).warnings == []


def test_normalize_rejects_non_petri_graphs():
    with pytest.raises(WrongNotationError):
        normalize_petri(chain(NodeKind.EVENT))


def test_normalize_splits_place_fanout_as_xor():
    graph = g([Node("p", NodeKind.PLACE, "p"), Node("t1", NodeKind.ACTIVITY, "t1"),
               Node("t2", NodeKind.ACTIVITY, "t2")],
              [("p", "t1"), ("p", "t2")], notation=Notation.PETRI_NET)
    norm = normalize_petri(graph)
    conn = norm.nodes["p#split"]
    assert conn.connector_type is ConnectorType.XOR
    assert conn.connector_role is ConnectorRole.SPLIT
    assert conn.synthetic
    assert norm.successors("p") == ["p#split"]
    assert norm.successors("p#split") == ["t1", "t2"]


def test_normalize_splits_transition_fanout_as_and():
    graph = g([Node("t", NodeKind.ACTIVITY, "t"), Node("p1", NodeKind.PLACE),
               Node("p2", NodeKind.PLACE)],
              [("t", "p1"), ("t", "p2")], notation=Notation.PETRI_NET)
    norm = normalize_petri(graph)
    assert norm.nodes["t#split"].connector_type is ConnectorType.AND


def test_normalize_adds_joins_for_fanin():
    graph = g([Node("t1", NodeKind.ACTIVITY), Node("t2", NodeKind.ACTIVITY),
               Node("p", NodeKind.PLACE)],
              [("t1", "p"), ("t2", "p")], notation=Notation.PETRI_NET)
    norm = normalize_petri(graph)
    conn = norm.nodes["p#join"]
    assert conn.connector_type is ConnectorType.XOR
    assert conn.connector_role is ConnectorRole.JOIN
    assert norm.predecessors("p") == ["p#join"]
    assert sorted(norm.predecessors("p#join")) == ["t1", "t2"]


def test_normalize_avoids_id_collisions():
    graph = g([Node("p", NodeKind.PLACE), Node("p#split", NodeKind.PLACE),
               Node("t1", NodeKind.ACTIVITY), Node("t2", NodeKind.ACTIVITY)],
              [("p", "t1"), ("p", "t2")], notation=Notation.PETRI_NET)
    norm = normalize_petri(graph)
    assert "p#split2" in norm.nodes
    assert norm.nodes["p#split2"].synthetic


def test_normalize_keeps_original_nodes_intact():
    graph = g([Node("p", NodeKind.PLACE, "label"), Node("t1", NodeKind.ACTIVITY),
               Node("t2", NodeKind.ACTIVITY)],
              [("p", "t1"), ("p", "t2")], notation=Notation.PETRI_NET)
    norm = normalize_petri(graph)
    assert norm.nodes["p"] == graph.nodes["p"]
    assert norm.name == graph.name
    assert norm.notation is Notation.PETRI_NET


@st.composite
def petri_nets(draw):
    n = draw(st.integers(min_value=1, max_value=8))
    ids = [f"n{i}" for i in range(n)]
    nodes = []
    for i in range(n):
        kind = NodeKind.PLACE if draw(st.booleans()) else NodeKind.ACTIVITY
        label = f"L{i}" if draw(st.booleans()) else ""
        nodes.append(Node(ids[i], kind, label))
    pair = st.tuples(st.sampled_from(ids), st.sampled_from(ids))
    edges = draw(st.lists(pair, max_size=2 * n, unique=True))
    return ProcessGraph("net", Notation.PETRI_NET, nodes, sorted(edges))


@given(petri_nets())
@settings(max_examples=150, deadline=None)
def test_normalize_is_idempotent(graph):
    once = normalize_petri(graph)
    assert normalize_petri(once) == once


@given(petri_nets())
@settings(max_examples=100, deadline=None)
def test_normalize_preserves_reachability_between_original_nodes(graph):
    norm = normalize_petri(graph)
    for a in graph.nodes:
        for b in graph.nodes:
            assert path_exists(graph, a, b) == path_exists(norm, a, b)
