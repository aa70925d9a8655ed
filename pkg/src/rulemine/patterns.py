"""Rule detectors for the four structural patterns, and their orchestrator.

Pattern 1 anchors on XOR splits (decision points), pattern 2 on AND/OR
splits, pattern 3 on data-object lifecycles (delegated to the lifecycle
module), pattern 4 on role assignments. Detectors are pure functions of the
graph; every scan visits nodes level by level and breaks ties
lexicographically, so output never depends on iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .errors import ValidationFailedError
from .graph import (
    PLACE_LIKE,
    ConnectorRole,
    ConnectorType,
    DataObjectRef,
    Node,
    NodeKind,
    Notation,
    ProcessGraph,
    RefDirection,
    path_exists,
    validate,
)
from .lifecycle import detect_state_order_rules
from .rules import BusinessRule, Conjunction, RuleForm, RuleSet

UNGUARDED = "(unguarded)"

# Which patterns each notation can express at all. Petri nets carry no data
# objects or roles, so patterns 3 and 4 are off the table for them. The
# native format can represent everything.
EXPRESSIBLE: dict[Notation, frozenset[int]] = {
    Notation.PETRI_NET: frozenset({1, 2}),
    Notation.EPC: frozenset({1, 2, 3, 4}),
    Notation.NATIVE: frozenset({1, 2, 3, 4}),
}


@dataclass(frozen=True)
class BranchBinding:
    """Evidence gathered on one branch of a split."""

    guard: str | None = None
    action: str | None = None
    data: DataObjectRef | None = None


@dataclass(frozen=True)
class PatternMatch:
    """Where a pattern matched: the anchoring node plus per-branch evidence."""

    pattern: int
    anchor: str
    branch_bindings: tuple[BranchBinding, ...] = ()


def _is_guard(node: Node) -> bool:
    return node.kind in PLACE_LIKE and bool(node.label)


def _is_silent_place(node: Node) -> bool:
    return node.kind in PLACE_LIKE and not node.label


def _is_activity(node: Node) -> bool:
    return node.kind is NodeKind.ACTIVITY


def _is_split(node: Node) -> bool:
    return node.is_connector(role=ConnectorRole.SPLIT)


def _any_node(node: Node) -> bool:
    return True


def _label_or_id(node: Node) -> str:
    return node.label or node.id


def _scan(graph: ProcessGraph, origin: str, frontier: list[str], forward: bool,
          want: Callable[[Node], bool], through: Callable[[Node], bool],
          notes: list[str] | None, what: str) -> str | None:
    """Level-wise search for the nearest node satisfying `want`.

    The starting frontier is match-checked too, so callers decide whether
    the scan is inclusive (frontier = [origin]) or exclusive (frontier =
    origin's neighbours). Non-matching nodes are expanded only when
    `through` allows; anything else ends its branch of the search. Equally
    near matches are resolved to the lexicographically least id, with a
    note recording the ambiguity.
    """
    step = graph.successors if forward else graph.predecessors
    seen = set(frontier)
    while frontier:
        matches = sorted(nid for nid in frontier if want(graph.nodes[nid]))
        if matches:
            if len(matches) > 1 and notes is not None:
                notes.append(
                    f"ambiguous {what} for {origin}: chose {matches[0]} "
                    f"over {', '.join(matches[1:])}")
            return matches[0]
        nxt = []
        for nid in frontier:
            if not through(graph.nodes[nid]):
                continue
            for nbr in step(nid):
                if nbr not in seen:
                    seen.add(nbr)
                    nxt.append(nbr)
        frontier = nxt
    return None


def _scan_back(graph: ProcessGraph, origin: str,
               want: Callable[[Node], bool], through: Callable[[Node], bool],
               notes: list[str] | None, what: str) -> str | None:
    """Nearest node behind `origin` (exclusive) satisfying `want`."""
    return _scan(graph, origin, graph.predecessors(origin), False, want,
                 through, notes, what)


def _guard_through(node: Node) -> bool:
    return _is_silent_place(node) or _is_split(node)


def _action_through(node: Node) -> bool:
    return node.kind in PLACE_LIKE or _is_split(node)


def _branch_guard(graph: ProcessGraph, head: str,
                  notes: list[str] | None) -> str | None:
    """First labeled event or place on a branch, before any activity or join."""
    return _scan(graph, head, [head], True, _is_guard, _guard_through, notes,
                 "guard")


def _branch_action(graph: ProcessGraph, head: str,
                   notes: list[str] | None) -> str | None:
    """First activity on a branch, before any join."""
    return _scan(graph, head, [head], True, _is_activity, _action_through,
                 notes, "branch activity")


def detect_decision_rules(graph: ProcessGraph,
                          notes: list[str] | None = None) -> list[BusinessRule]:
    """Pattern 1: each XOR split is a decision point.

    A guarded branch states what data the decision produces: the guard is
    the condition and the next labeled event or place downstream names the
    produced data (the guard itself when nothing follows). A branch leading
    to an activity before any join states what action the decision
    triggers, conditioned on its guard or marked unguarded.
    """
    rules: list[BusinessRule] = []
    for conn_id in graph.connectors(ConnectorType.XOR, ConnectorRole.SPLIT):
        decision = _scan_back(graph, conn_id, _is_activity,
                              lambda n: n.kind in PLACE_LIKE, notes,
                              "decision activity")
        on_event_id = None
        if decision is not None:
            on_event_id = _scan_back(graph, decision, _is_guard, _any_node,
                                     notes, "triggering event")
        for head in graph.successors(conn_id):
            guard_id = _branch_guard(graph, head, notes)
            if guard_id is not None:
                guard = graph.nodes[guard_id].label
                produced_id = _scan(graph, guard_id, graph.successors(guard_id),
                                    True, _is_guard, _guard_through, notes,
                                    "produced data")
                produced = (graph.nodes[produced_id].label
                            if produced_id is not None else guard)
                provenance = {conn_id, head, guard_id}
                if produced_id is not None:
                    provenance.add(produced_id)
                rules.append(BusinessRule(
                    form=RuleForm.DERIVATION_1_1,
                    provenance=tuple(sorted(provenance)),
                    condition=guard,
                    produced_data=produced,
                ))
            action_id = _branch_action(graph, head, notes)
            if action_id is not None:
                provenance = {conn_id, head, action_id}
                if guard_id is not None:
                    provenance.add(guard_id)
                if on_event_id is not None:
                    provenance.add(on_event_id)
                rules.append(BusinessRule(
                    form=RuleForm.ACTION_ASSERTION_1_2,
                    provenance=tuple(sorted(provenance)),
                    on_event=(graph.nodes[on_event_id].label
                              if on_event_id is not None else None),
                    condition=(graph.nodes[guard_id].label
                               if guard_id is not None else UNGUARDED),
                    actions=(_label_or_id(graph.nodes[action_id]),),
                ))
    return rules


def _word(count: int) -> str:
    words = ["zero", "one", "two", "three", "four", "five",
             "six", "seven", "eight", "nine", "ten"]
    return words[count] if count < len(words) else str(count)


def _correlation_consequent(refs: list[DataObjectRef],
                            antecedent_object: str) -> tuple[str, str | None]:
    """Phrase the data produced across all branches as one consequent."""
    if len(refs) == 1:
        return refs[0].object_name, refs[0].state
    names = list(dict.fromkeys(ref.object_name for ref in refs))
    if len(names) == 1:
        things = f"{_word(len(refs))} {names[0]}s"
    else:
        things = " and ".join(names)
    return (f"there exist {things} related to that {antecedent_object.lower()}",
            None)


def detect_connector_rules(graph: ProcessGraph,
                           notes: list[str] | None = None) -> list[BusinessRule]:
    """Pattern 2: AND and OR splits trigger their branch activities together.

    The nearest labeled event or place behind the split conditions the rule
    (doubling as its event). When that condition names a data-object state
    some upstream activity outputs, and every branch activity outputs data
    itself, the split additionally correlates the antecedent state with the
    branch outputs.
    """
    rules: list[BusinessRule] = []
    split_ids = sorted(graph.connectors(ConnectorType.AND, ConnectorRole.SPLIT)
                       + graph.connectors(ConnectorType.OR, ConnectorRole.SPLIT))
    for conn_id in split_ids:
        ctype = graph.nodes[conn_id].connector_type
        cond_id = _scan_back(graph, conn_id, _is_guard, _any_node, notes,
                             "connector condition")
        condition = graph.nodes[cond_id].label if cond_id is not None else UNGUARDED

        action_ids: list[str] = []
        for head in graph.successors(conn_id):
            action_id = _branch_action(graph, head, notes)
            if action_id is not None and action_id not in action_ids:
                action_ids.append(action_id)
        if not action_ids:
            continue

        provenance = {conn_id, *action_ids}
        if cond_id is not None:
            provenance.add(cond_id)
        rules.append(BusinessRule(
            form=RuleForm.CONNECTOR_ACTION_2_1,
            provenance=tuple(sorted(provenance)),
            on_event=condition if cond_id is not None else None,
            condition=condition,
            actions=tuple(_label_or_id(graph.nodes[a]) for a in action_ids),
            conjunction=Conjunction.AND if ctype is ConnectorType.AND
            else Conjunction.OR,
        ))

        if cond_id is None:
            continue
        antecedent = _state_condition_source(graph, condition, conn_id)
        if antecedent is None:
            continue
        producer_id, obj, state = antecedent
        out_refs: list[DataObjectRef] = []
        all_have_output = True
        for action_id in action_ids:
            refs = [ref for ref in graph.nodes[action_id].data_refs
                    if ref.direction is RefDirection.OUTPUT]
            if not refs:
                all_have_output = False
                break
            out_refs.extend(refs)
        if not all_have_output:
            continue
        consequent_object, consequent_state = _correlation_consequent(out_refs, obj)
        rules.append(BusinessRule(
            form=RuleForm.DATA_CORRELATION_2_2,
            provenance=tuple(sorted({conn_id, cond_id, producer_id, *action_ids})),
            antecedent_object=obj,
            antecedent_state=state,
            consequent_object=consequent_object,
            consequent_state=consequent_state,
        ))
    return rules


def _state_condition_source(graph: ProcessGraph, condition: str,
                            conn_id: str) -> tuple[str, str, str] | None:
    """Find an upstream activity whose stateful output reads as `condition`.

    Returns (activity id, object, state) for the first activity, in id
    order, with an Output ref such that "<object> is <state>" equals the
    condition label and the activity can reach the connector.
    """
    for nid in graph.activities():
        for ref in graph.nodes[nid].data_refs:
            if ref.direction is not RefDirection.OUTPUT or ref.state is None:
                continue
            if (f"{ref.object_name} is {ref.state}" == condition
                    and path_exists(graph, nid, conn_id)):
                return nid, ref.object_name, ref.state
    return None


def detect_authorization_rules(graph: ProcessGraph,
                               notes: list[str] | None = None) -> list[BusinessRule]:
    """Pattern 4: each role attached to an activity is responsible for it."""
    rules: list[BusinessRule] = []
    for nid in graph.activities():
        node = graph.nodes[nid]
        for role in dict.fromkeys(node.roles):
            rules.append(BusinessRule(
                form=RuleForm.AUTHORIZATION_4_1,
                provenance=(nid,),
                subject=role,
                constraint=_label_or_id(node),
            ))
    return rules


def find_matches(graph: ProcessGraph, pattern: int) -> list[PatternMatch]:
    """Evidence-level view of where a pattern applies, without building rules."""
    matches: list[PatternMatch] = []
    if pattern == 1:
        for conn_id in graph.connectors(ConnectorType.XOR, ConnectorRole.SPLIT):
            bindings = tuple(
                BranchBinding(guard=_branch_guard(graph, head, None),
                              action=_branch_action(graph, head, None))
                for head in graph.successors(conn_id))
            matches.append(PatternMatch(1, conn_id, bindings))
    elif pattern == 2:
        for conn_id in sorted(
                graph.connectors(ConnectorType.AND, ConnectorRole.SPLIT)
                + graph.connectors(ConnectorType.OR, ConnectorRole.SPLIT)):
            bindings = []
            for head in graph.successors(conn_id):
                action_id = _branch_action(graph, head, None)
                data = None
                if action_id is not None:
                    outputs = [ref for ref in graph.nodes[action_id].data_refs
                               if ref.direction is RefDirection.OUTPUT]
                    data = outputs[0] if outputs else None
                bindings.append(BranchBinding(action=action_id, data=data))
            matches.append(PatternMatch(2, conn_id, tuple(bindings)))
    elif pattern == 3:
        for nid in graph.activities():
            for ref in graph.nodes[nid].data_refs:
                if ref.direction is RefDirection.OUTPUT and ref.state is not None:
                    matches.append(PatternMatch(
                        3, nid, (BranchBinding(action=nid, data=ref),)))
    elif pattern == 4:
        for nid in graph.activities():
            if graph.nodes[nid].roles:
                matches.append(PatternMatch(4, nid, (BranchBinding(action=nid),)))
    else:
        raise ValueError(f"pattern must be 1..4, got {pattern}")
    return matches


_DETECTORS = {
    1: detect_decision_rules,
    2: detect_connector_rules,
    3: detect_state_order_rules,
    4: detect_authorization_rules,
}


def extract_all(graph: ProcessGraph,
                patterns: Iterable[int] = (1, 2, 3, 4)) -> RuleSet:
    """Run the selected detectors on a validated graph.

    Patterns the graph's notation cannot express are skipped with a note
    naming pattern and notation, never silently. Raises ValidationFailedError
    when the graph has validation errors.
    """
    wanted = sorted(set(patterns))
    for p in wanted:
        if p not in _DETECTORS:
            raise ValueError(f"pattern must be 1..4, got {p}")
    report = validate(graph)
    if not report.ok():
        raise ValidationFailedError(
            f"graph has {len(report.errors)} validation error(s)", report=report)

    rules: list[BusinessRule] = []
    skip_notes: list[str] = []
    notes: list[str] = []
    for p in wanted:
        if p not in EXPRESSIBLE[graph.notation]:
            skip_notes.append(
                f"pattern {p} not expressible in {graph.notation.value} notation")
            continue
        rules.extend(_DETECTORS[p](graph, notes))
    return RuleSet.build(rules, graph.name, graph.notation,
                         skip_notes, list(dict.fromkeys(notes)))
