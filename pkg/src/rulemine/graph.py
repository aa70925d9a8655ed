"""Unified directed-graph representation of a process model.

One graph type covers both notations: Petri-net places/transitions and EPC
events/functions/connectors map onto the same node kinds, so the pattern
detectors only ever see one shape of data. Graphs are immutable after
construction; every operation here is a pure read.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Collection, Iterable

from .errors import DuplicateIdError, UnknownNodeError, WrongNotationError


class Notation(Enum):
    PETRI_NET = "PetriNet"
    EPC = "EPC"
    NATIVE = "Native"


class NodeKind(Enum):
    ACTIVITY = "Activity"
    EVENT = "Event"
    PLACE = "Place"
    CONNECTOR = "Connector"
    START = "Start"
    END = "End"


class ConnectorType(Enum):
    AND = "AND"
    XOR = "XOR"
    OR = "OR"


class ConnectorRole(Enum):
    SPLIT = "Split"
    JOIN = "Join"


class RefDirection(Enum):
    """Whether an activity reads or writes the referenced data object."""

    INPUT = "Input"
    OUTPUT = "Output"


class Direction(Enum):
    """Traversal direction for adjacency queries."""

    FORWARD = "Forward"
    BACKWARD = "Backward"


@dataclass(frozen=True)
class DataObjectRef:
    """A business object read or written by an activity, e.g. Booking[confirmed]."""

    object_name: str
    state: str | None = None
    direction: RefDirection = RefDirection.OUTPUT


@dataclass(frozen=True)
class Node:
    """One graph node. Connector fields are meaningful only for connectors,
    data refs and roles only for activities; `validate` reports misuse."""

    id: str
    kind: NodeKind
    label: str = ""
    connector_type: ConnectorType | None = None
    connector_role: ConnectorRole | None = None
    data_refs: tuple[DataObjectRef, ...] = ()
    roles: tuple[str, ...] = ()
    synthetic: bool = False

    def is_connector(self, ctype: ConnectorType | None = None,
                     role: ConnectorRole | None = None) -> bool:
        if self.kind is not NodeKind.CONNECTOR:
            return False
        if ctype is not None and self.connector_type is not ctype:
            return False
        if role is not None and self.connector_role is not role:
            return False
        return True


# Node kinds that carry condition/state semantics rather than work. Used by
# normalization to pick XOR (choice at a condition) over AND (parallel work).
PLACE_LIKE = frozenset({NodeKind.PLACE, NodeKind.EVENT, NodeKind.START, NodeKind.END})


class ProcessGraph:
    """Immutable process graph.

    Dangling edges (endpoints naming no node) are representable so that
    `validate` can report them; they simply never appear in adjacency.
    Duplicate node ids are not representable and raise at construction.
    """

    def __init__(self, name: str, notation: Notation,
                 nodes: Iterable[Node], edges: Iterable[tuple[str, str]]):
        self.name = name
        self.notation = notation
        self.nodes: dict[str, Node] = {}
        for node in nodes:
            if node.id in self.nodes:
                raise DuplicateIdError(f"duplicate node id {node.id!r}")
            self.nodes[node.id] = node
        self.edges: tuple[tuple[str, str], ...] = tuple((s, t) for s, t in edges)
        self._fwd: dict[str, set[str]] = {nid: set() for nid in self.nodes}
        self._bwd: dict[str, set[str]] = {nid: set() for nid in self.nodes}
        for s, t in self.edges:
            if s in self.nodes and t in self.nodes:
                self._fwd[s].add(t)
                self._bwd[t].add(s)

    def __contains__(self, node_id: str) -> bool:
        return node_id in self.nodes

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProcessGraph):
            return NotImplemented
        return (self.name == other.name and self.notation == other.notation
                and self.nodes == other.nodes
                and set(self.edges) == set(other.edges))

    __hash__ = None

    def __repr__(self) -> str:
        return (f"ProcessGraph({self.name!r}, {self.notation.value}, "
                f"{len(self.nodes)} nodes, {len(self.edges)} edges)")

    def node(self, node_id: str) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNodeError(f"no node {node_id!r}") from None

    def successors(self, node_id: str) -> list[str]:
        return sorted(self._fwd.get(node_id, ()))

    def predecessors(self, node_id: str) -> list[str]:
        return sorted(self._bwd.get(node_id, ()))

    def out_degree(self, node_id: str) -> int:
        return len(self._fwd.get(node_id, ()))

    def in_degree(self, node_id: str) -> int:
        return len(self._bwd.get(node_id, ()))

    def start_nodes(self) -> list[str]:
        """Nodes with no incoming edges. Start-ness is derived, not declared."""
        return sorted(nid for nid in self.nodes if not self._bwd[nid])

    def end_nodes(self) -> list[str]:
        return sorted(nid for nid in self.nodes if not self._fwd[nid])

    def connectors(self, ctype: ConnectorType | None = None,
                   role: ConnectorRole | None = None) -> list[str]:
        return sorted(nid for nid, n in self.nodes.items() if n.is_connector(ctype, role))

    def activities(self) -> list[str]:
        return sorted(nid for nid, n in self.nodes.items() if n.kind is NodeKind.ACTIVITY)


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    locus: str
    message: str


@dataclass
class ValidationReport:
    errors: list[ValidationIssue] = field(default_factory=list)
    warnings: list[ValidationIssue] = field(default_factory=list)

    def ok(self) -> bool:
        return not self.errors


def validate(graph: ProcessGraph) -> ValidationReport:
    """Check all structural invariants, returning problems instead of raising.

    An empty error list means every downstream detector accepts the graph.
    EPC graphs get an extra warning (never an error) for directly adjacent
    activities with no event in between.
    """
    report = ValidationReport()

    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        if nid == "":
            report.errors.append(ValidationIssue(
                "EMPTY_NODE_ID", nid, "node id must be a non-empty string"))
        if node.kind is NodeKind.CONNECTOR:
            if node.connector_type is None or node.connector_role is None:
                report.errors.append(ValidationIssue(
                    "CONNECTOR_FIELDS", nid,
                    "connector must carry both a connector type and a role"))
        elif node.connector_type is not None or node.connector_role is not None:
            report.errors.append(ValidationIssue(
                "CONNECTOR_FIELDS", nid,
                f"{node.kind.value} node must not carry connector fields"))
        if node.kind is not NodeKind.ACTIVITY and (node.data_refs or node.roles):
            report.errors.append(ValidationIssue(
                "ACTIVITY_FIELDS", nid,
                f"data refs and roles are only allowed on activities, not {node.kind.value}"))
        if any(role == "" for role in node.roles):
            report.errors.append(ValidationIssue(
                "ACTIVITY_FIELDS", nid, "role strings must be non-empty"))
        for ref in node.data_refs:
            if not ref.object_name or ref.state == "":
                report.errors.append(ValidationIssue(
                    "DATA_REF_FIELDS", nid,
                    "data object name must be non-empty and state, when present, non-empty"))

    seen_edges: set[tuple[str, str]] = set()
    for s, t in graph.edges:
        locus = f"{s}->{t}"
        for endpoint in (s, t):
            if endpoint not in graph.nodes:
                report.errors.append(ValidationIssue(
                    "DANGLING_EDGE", locus, f"edge references missing node {endpoint!r}"))
        if (s, t) in seen_edges:
            report.errors.append(ValidationIssue(
                "DUPLICATE_EDGE", locus, "duplicate edge"))
        seen_edges.add((s, t))

    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        if node.kind is not NodeKind.CONNECTOR or node.connector_role is None:
            continue
        ind, outd = graph.in_degree(nid), graph.out_degree(nid)
        if node.connector_role is ConnectorRole.SPLIT and (outd < 2 or ind != 1):
            report.errors.append(ValidationIssue(
                "CONNECTOR_ARITY", nid,
                f"split connector must have in-degree 1 and out-degree >= 2, has {ind}/{outd}"))
        if node.connector_role is ConnectorRole.JOIN and (ind < 2 or outd != 1):
            report.errors.append(ValidationIssue(
                "CONNECTOR_ARITY", nid,
                f"join connector must have in-degree >= 2 and out-degree 1, has {ind}/{outd}"))

    if graph.notation is Notation.EPC:
        for s, t in graph.edges:
            if (s in graph.nodes and t in graph.nodes
                    and graph.nodes[s].kind is NodeKind.ACTIVITY
                    and graph.nodes[t].kind is NodeKind.ACTIVITY):
                report.warnings.append(ValidationIssue(
                    "ADJACENT_ACTIVITIES", f"{s}->{t}",
                    "two activities are directly adjacent with no intervening event"))

    return report


def _fresh_id(taken: set[str], origin: str, suffix: str) -> str:
    candidate = f"{origin}#{suffix}"
    n = 2
    while candidate in taken:
        candidate = f"{origin}#{suffix}{n}"
        n += 1
    taken.add(candidate)
    return candidate


def normalize_petri(graph: ProcessGraph) -> ProcessGraph:
    """Make implicit Petri-net routing explicit as synthetic connectors.

    A place with several outgoing arcs offers an exclusive choice, so it
    gains an XOR split; a transition with several outgoing arcs starts
    parallel work, so it gains an AND split. Joins mirror this. A node with
    both fan-in and fan-out gets a join in front and a split behind.
    Idempotent: connectors are never re-split.
    """
    if graph.notation is not Notation.PETRI_NET:
        raise WrongNotationError(
            f"normalize_petri expects a PetriNet graph, got {graph.notation.value}")

    taken = set(graph.nodes)
    split_of: dict[str, str] = {}
    join_of: dict[str, str] = {}
    new_nodes: list[Node] = []
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        if node.kind is NodeKind.CONNECTOR:
            continue
        ctype = ConnectorType.XOR if node.kind in PLACE_LIKE else ConnectorType.AND
        if graph.out_degree(nid) >= 2:
            sid = _fresh_id(taken, nid, "split")
            split_of[nid] = sid
            new_nodes.append(Node(sid, NodeKind.CONNECTOR, connector_type=ctype,
                                  connector_role=ConnectorRole.SPLIT, synthetic=True))
        if graph.in_degree(nid) >= 2:
            jid = _fresh_id(taken, nid, "join")
            join_of[nid] = jid
            new_nodes.append(Node(jid, NodeKind.CONNECTOR, connector_type=ctype,
                                  connector_role=ConnectorRole.JOIN, synthetic=True))

    edges: list[tuple[str, str]] = []
    for s, t in graph.edges:
        edges.append((split_of.get(s, s), join_of.get(t, t)))
    for nid in sorted(split_of):
        edges.append((nid, split_of[nid]))
    for nid in sorted(join_of):
        edges.append((join_of[nid], nid))

    nodes = list(graph.nodes.values()) + new_nodes
    return ProcessGraph(graph.name, graph.notation, nodes, edges)


def neighbors(graph: ProcessGraph, node_id: str, direction: Direction) -> list[str]:
    """Adjacent node ids in the given direction, lexicographically ordered."""
    if node_id not in graph.nodes:
        raise UnknownNodeError(f"no node {node_id!r}")
    if direction is Direction.FORWARD:
        return graph.successors(node_id)
    return graph.predecessors(node_id)


def path_exists(graph: ProcessGraph, source: str, target: str,
                excluding: Collection[str] = ()) -> bool:
    """True iff a directed path from source to target avoids `excluding`.

    Endpoints count: an excluded source or target means no path. The empty
    path makes any non-excluded node reachable from itself.
    """
    for endpoint in (source, target):
        if endpoint not in graph.nodes:
            raise UnknownNodeError(f"no node {endpoint!r}")
    excluded = set(excluding)
    if source in excluded or target in excluded:
        return False
    if source == target:
        return True
    frontier = [source]
    seen = {source}
    while frontier:
        nxt = []
        for nid in frontier:
            for succ in graph._fwd.get(nid, ()):
                if succ in seen or succ in excluded:
                    continue
                if succ == target:
                    return True
                seen.add(succ)
                nxt.append(succ)
        frontier = nxt
    return False
