"""Data-object state lifecycles and state-order rules.

An object's lifecycle is reconstructed from Output data refs carrying a
state, plus events whose label reads "<object> is <state>" for an object
already known from refs. From producer reachability we derive which state
must precede which (every path from a start to an x-producer passes a
y-producer) and whether the change is irreversible (no way back from an
x-producer to a y-producer).

`brute_force_precedence` answers the same questions by enumerating every
simple path on small graphs. It shares no traversal code with the
reachability route and exists to check it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GraphTooLargeError, UnknownStateError
from .graph import NodeKind, ProcessGraph, RefDirection, path_exists
from .rules import BusinessRule, RuleForm

ORACLE_NODE_LIMIT = 16


@dataclass
class Lifecycle:
    object_name: str
    states: set[str]
    producers: dict[str, set[str]]


@dataclass(frozen=True)
class PrecedencePair:
    object_name: str
    earlier_state: str
    later_state: str
    irreversible: bool


def _nearest_activity_backward(graph: ProcessGraph, origin: str) -> str | None:
    """Closest Activity upstream of origin; lexicographic tie-break."""
    frontier = [origin]
    seen = {origin}
    while frontier:
        nxt = []
        matches = []
        for nid in frontier:
            for pred in graph.predecessors(nid):
                if pred in seen:
                    continue
                seen.add(pred)
                if graph.nodes[pred].kind is NodeKind.ACTIVITY:
                    matches.append(pred)
                else:
                    nxt.append(pred)
        if matches:
            return min(matches)
        frontier = nxt
    return None


def collect_lifecycles(graph: ProcessGraph) -> list[Lifecycle]:
    """One Lifecycle per object named in a stateful Output ref, ordered by name.

    Events reading "<object> is <state>" for a known object also record the
    state, produced by the nearest upstream Activity. Input-only and
    stateless refs contribute nothing; states nobody produces are dropped.
    """
    producers: dict[str, dict[str, set[str]]] = {}
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        for ref in node.data_refs:
            if ref.direction is RefDirection.OUTPUT and ref.state is not None:
                producers.setdefault(ref.object_name, {}).setdefault(
                    ref.state, set()).add(nid)

    # Longest known object name wins when one label matches several.
    known = sorted(producers, key=len, reverse=True)
    for nid in sorted(graph.nodes):
        node = graph.nodes[nid]
        if node.kind is not NodeKind.EVENT or not node.label:
            continue
        for obj in known:
            marker = f"{obj} is "
            if node.label.startswith(marker) and len(node.label) > len(marker):
                state = node.label[len(marker):]
                producer = _nearest_activity_backward(graph, nid)
                if producer is not None:
                    producers[obj].setdefault(state, set()).add(producer)
                break

    return [
        Lifecycle(obj, set(states), {s: set(ids) for s, ids in states.items()})
        for obj, states in sorted(producers.items())
    ]


def must_precede(graph: ProcessGraph, lifecycle: Lifecycle, y: str, x: str,
                 notes: list[str] | None = None) -> bool:
    """True iff state y must already have been produced before state x can be.

    Holds when no start node reaches any producer of x while avoiding every
    producer of y. Producers of x unreachable from any start are vacuously
    guarded (noted when a notes list is given).
    """
    for state in (y, x):
        if state not in lifecycle.states:
            raise UnknownStateError(
                f"object {lifecycle.object_name!r} has no state {state!r}")
    if x == y:
        raise ValueError("states must differ")
    starts = graph.start_nodes()
    blockers = lifecycle.producers[y]
    for px in sorted(lifecycle.producers[x]):
        reachable = any(path_exists(graph, s, px) for s in starts)
        if not reachable:
            if notes is not None:
                notes.append(
                    f"producer {px} of state {x!r} is unreachable from any start; "
                    f"treated as vacuously guarded")
            continue
        if any(path_exists(graph, s, px, excluding=blockers) for s in starts):
            return False
    return True


def derive_precedence(graph: ProcessGraph, lifecycle: Lifecycle,
                      notes: list[str] | None = None) -> list[PrecedencePair]:
    """All (earlier, later) state pairs of one lifecycle, with irreversibility.

    Pairs whose two states share exactly the same producer set are degenerate
    (each trivially precedes the other) and are skipped with a note. A pair
    is irreversible when no producer of the later state reaches a producer of
    the earlier one; a return path suppresses irreversibility with a note.
    """
    pairs: list[PrecedencePair] = []
    states = sorted(lifecycle.states)
    for x in states:
        for y in states:
            if x == y:
                continue
            if lifecycle.producers[x] == lifecycle.producers[y]:
                if notes is not None and y < x:
                    notes.append(
                        f"skipped degenerate state pair {y!r}/{x!r} of "
                        f"{lifecycle.object_name!r}: identical producers")
                continue
            if not must_precede(graph, lifecycle, y, x, notes):
                continue
            reversible = any(
                path_exists(graph, px, py)
                for px in sorted(lifecycle.producers[x])
                for py in sorted(lifecycle.producers[y]))
            if reversible and notes is not None:
                notes.append(
                    f"state {x!r} of {lifecycle.object_name!r} can return to "
                    f"{y!r}; prohibition rule suppressed")
            pairs.append(PrecedencePair(lifecycle.object_name, y, x,
                                        not reversible))
    pairs.sort(key=lambda p: (p.object_name, p.later_state, p.earlier_state))
    return pairs


def detect_state_order_rules(graph: ProcessGraph,
                             notes: list[str] | None = None) -> list[BusinessRule]:
    """Pattern 3: a state-order rule per must-precede pair, plus a
    prohibition rule when the change is irreversible."""
    rules: list[BusinessRule] = []
    for lifecycle in collect_lifecycles(graph):
        for pair in derive_precedence(graph, lifecycle, notes):
            provenance = tuple(sorted(
                lifecycle.producers[pair.later_state]
                | lifecycle.producers[pair.earlier_state]))
            rules.append(BusinessRule(
                form=RuleForm.STATE_ORDER_3_1,
                provenance=provenance,
                antecedent_object=pair.object_name,
                antecedent_state=pair.later_state,
                consequent_state=pair.earlier_state,
            ))
            if pair.irreversible:
                rules.append(BusinessRule(
                    form=RuleForm.STATE_PROHIBITION_3_2,
                    provenance=provenance,
                    antecedent_object=pair.object_name,
                    antecedent_state=pair.later_state,
                    consequent_state=pair.earlier_state,
                ))
    return rules


def _all_simple_paths(graph: ProcessGraph, source: str, target: str) -> list[list[str]]:
    """Every simple path source..target, including the trivial [source]
    when source == target."""
    paths: list[list[str]] = []
    stack: list[str] = []

    def visit(nid: str) -> None:
        stack.append(nid)
        if nid == target:
            paths.append(list(stack))
        else:
            for succ in graph.successors(nid):
                if succ not in stack:
                    visit(succ)
        stack.pop()

    visit(source)
    return paths


def brute_force_precedence(graph: ProcessGraph,
                           lifecycle: Lifecycle) -> list[PrecedencePair]:
    """Oracle route: decide precedence pairs by exhaustive path enumeration.

    (y, x) is a pair iff every simple path from a start node to an x-producer
    contains a y-producer; irreversible iff no simple path runs from any
    x-producer to any y-producer. Degenerate pairs (identical producer sets)
    are skipped, mirroring the analytical route.
    """
    if len(graph.nodes) > ORACLE_NODE_LIMIT:
        raise GraphTooLargeError(
            f"oracle accepts at most {ORACLE_NODE_LIMIT} nodes, "
            f"got {len(graph.nodes)}")
    starts = graph.start_nodes()
    pairs: list[PrecedencePair] = []
    states = sorted(lifecycle.states)
    for x in states:
        for y in states:
            if x == y or lifecycle.producers[x] == lifecycle.producers[y]:
                continue
            prod_x = sorted(lifecycle.producers[x])
            prod_y = lifecycle.producers[y]
            holds = all(
                any(step in prod_y for step in path)
                for px in prod_x
                for s in starts
                for path in _all_simple_paths(graph, s, px))
            if not holds:
                continue
            reversal = any(
                _all_simple_paths(graph, px, py)
                for px in prod_x
                for py in sorted(prod_y))
            pairs.append(PrecedencePair(lifecycle.object_name, y, x,
                                        not reversal))
    pairs.sort(key=lambda p: (p.object_name, p.later_state, p.earlier_state))
    return pairs
