"""Reading and writing process models.

Three formats come in: a PNML subset, an EPML subset, and a native JSON
schema. Only the native schema goes out. XML element names are matched by
local name so namespaced documents work, but matching stays case sensitive.
"""

from __future__ import annotations

import json
from enum import Enum
from xml.etree import ElementTree

from .errors import (
    ConnectorDegreeError,
    DanglingArcError,
    DuplicateIdError,
    MalformedJsonError,
    MalformedXmlError,
    SchemaViolationError,
    UnrecognizedFormatError,
)
from .graph import (
    ConnectorRole,
    ConnectorType,
    DataObjectRef,
    Node,
    NodeKind,
    Notation,
    ProcessGraph,
    RefDirection,
    normalize_petri,
)

SCHEMA_VERSION = "1"


class FormatTag(Enum):
    PNML = "PNML"
    EPML = "EPML"
    NATIVE_JSON = "NativeJSON"


def _local(tag: str) -> str:
    """XML tag without its namespace prefix."""
    return tag.rsplit("}", 1)[-1]


def detect_format(document: bytes) -> FormatTag:
    """Sniff the format from the document head without a full parse."""
    try:
        text = document.decode("utf-8")
    except UnicodeDecodeError:
        raise UnrecognizedFormatError("document is not valid UTF-8") from None
    stripped = text.lstrip("﻿ \t\r\n")
    if stripped.startswith("<"):
        for event, elem in _iterparse_first(text):
            root = _local(elem.tag)
            if root == "pnml":
                return FormatTag.PNML
            if root == "epml":
                return FormatTag.EPML
            raise UnrecognizedFormatError(f"unrecognized XML root element {root!r}")
        raise UnrecognizedFormatError("XML document has no root element")
    try:
        data = json.loads(stripped)
    except (json.JSONDecodeError, RecursionError):
        raise UnrecognizedFormatError(
            "document is neither recognizable XML nor JSON") from None
    if isinstance(data, dict) and "process_graph" in data:
        return FormatTag.NATIVE_JSON
    raise UnrecognizedFormatError('JSON document lacks a top-level "process_graph" key')


def _iterparse_first(text: str):
    """Yield at most the first start event, swallowing malformed-XML noise."""
    try:
        import io

        for event, elem in ElementTree.iterparse(io.StringIO(text), events=("start",)):
            yield event, elem
            return
    except ElementTree.ParseError:
        return


def _parse_xml(document: bytes) -> ElementTree.Element:
    try:
        return ElementTree.fromstring(document)
    except ElementTree.ParseError as exc:
        raise MalformedXmlError(f"malformed XML: {exc}") from None


def _name_text(elem: ElementTree.Element) -> str:
    """Label from a nested <name><text>…</text></name>, trimmed; "" if absent."""
    for child in elem:
        if _local(child.tag) == "name":
            for sub in child:
                if _local(sub.tag) == "text":
                    return (sub.text or "").strip()
            return (child.text or "").strip()
    return ""


def parse_pnml(document: bytes, warnings: list[str] | None = None) -> ProcessGraph:
    """Parse a basic place/transition net and normalize its routing.

    Recognized elements: pnml, net, place, transition, arc, name, text.
    Anything else is skipped with a warning. The returned graph already has
    synthetic connectors, so downstream code never sees implicit routing.
    """
    if warnings is None:
        warnings = []
    root = _parse_xml(document)
    if _local(root.tag) != "pnml":
        raise UnrecognizedFormatError(
            f"expected root element pnml, got {_local(root.tag)!r}")

    nodes: list[Node] = []
    edges: list[tuple[str, str]] = []
    node_ids: set[str] = set()
    name = ""

    def walk(elem: ElementTree.Element) -> None:
        nonlocal name
        for child in elem:
            tag = _local(child.tag)
            if tag == "net":
                if not name:
                    name = _name_text(child) or child.get("id", "")
                walk(child)
            elif tag == "place":
                nid = child.get("id", "")
                nodes.append(Node(nid, NodeKind.PLACE, _name_text(child)))
                node_ids.add(nid)
            elif tag == "transition":
                nid = child.get("id", "")
                nodes.append(Node(nid, NodeKind.ACTIVITY, _name_text(child)))
                node_ids.add(nid)
            elif tag == "arc":
                source, target = child.get("source"), child.get("target")
                if source is None or target is None:
                    raise DanglingArcError(
                        f"arc {child.get('id', '?')!r} lacks a source or target attribute")
                edges.append((source, target))
            elif tag in ("name", "text"):
                pass
            else:
                warnings.append(f"skipped unrecognized PNML element <{tag}>")

    walk(root)
    for source, target in edges:
        for endpoint in (source, target):
            if endpoint not in node_ids:
                raise DanglingArcError(f"arc references unknown node id {endpoint!r}")
    graph = ProcessGraph(name, Notation.PETRI_NET, nodes, edges)
    return normalize_petri(graph)


_EPML_CONNECTORS = {
    "and": ConnectorType.AND,
    "or": ConnectorType.OR,
    "xor": ConnectorType.XOR,
}


def parse_epml(document: bytes, warnings: list[str] | None = None) -> ProcessGraph:
    """Parse an EPC from the EPML subset.

    Connector Split/Join roles are inferred from arc degrees after all arcs
    are read. Data objects and roles ride on two extension elements:

        <dataObject function="f1" name="Booking" state="confirmed" direction="out"/>
        <role function="f1" name="the system"/>
    """
    if warnings is None:
        warnings = []
    root = _parse_xml(document)
    if _local(root.tag) != "epml":
        raise UnrecognizedFormatError(
            f"expected root element epml, got {_local(root.tag)!r}")

    raw: dict[str, tuple[NodeKind, str, ConnectorType | None]] = {}
    order: list[str] = []
    edges: list[tuple[str, str]] = []
    data_refs: dict[str, list[DataObjectRef]] = {}
    roles: dict[str, list[str]] = {}
    name = ""

    def note(nid: str, kind: NodeKind, label: str, ctype: ConnectorType | None) -> None:
        if nid in raw:
            raise DuplicateIdError(f"duplicate node id {nid!r}")
        raw[nid] = (kind, label, ctype)
        order.append(nid)

    def walk(elem: ElementTree.Element) -> None:
        nonlocal name
        for child in elem:
            tag = _local(child.tag)
            if tag == "epc":
                if not name:
                    name = (child.get("name") or child.get("id") or "").strip()
                walk(child)
            elif tag in ("directory", "definitions", "coordinates", "graphicalInformation"):
                walk(child)
            elif tag == "event":
                note(child.get("id", ""), NodeKind.EVENT, _name_text(child), None)
            elif tag == "function":
                note(child.get("id", ""), NodeKind.ACTIVITY, _name_text(child), None)
            elif tag in _EPML_CONNECTORS:
                note(child.get("id", ""), NodeKind.CONNECTOR, "", _EPML_CONNECTORS[tag])
            elif tag == "arc":
                flow = next((sub for sub in child if _local(sub.tag) == "flow"), None)
                holder = flow if flow is not None else child
                source, target = holder.get("source"), holder.get("target")
                if source is None or target is None:
                    raise DanglingArcError(
                        f"arc {child.get('id', '?')!r} lacks a source or target")
                edges.append((source, target))
            elif tag == "dataObject":
                fid = child.get("function", "")
                direction = (RefDirection.INPUT if child.get("direction") == "in"
                             else RefDirection.OUTPUT)
                state = child.get("state")
                data_refs.setdefault(fid, []).append(DataObjectRef(
                    (child.get("name") or "").strip(),
                    state.strip() if state is not None else None, direction))
            elif tag == "role":
                roles.setdefault(child.get("function", ""), []).append(
                    (child.get("name") or "").strip())
            elif tag in ("name", "text"):
                pass
            else:
                warnings.append(f"skipped unrecognized EPML element <{tag}>")

    walk(root)
    for source, target in edges:
        for endpoint in (source, target):
            if endpoint not in raw:
                raise DanglingArcError(f"arc references unknown node id {endpoint!r}")
    for fid in sorted(set(data_refs) | set(roles)):
        if fid not in raw or raw[fid][0] is not NodeKind.ACTIVITY:
            raise DanglingArcError(
                f"dataObject/role references missing or non-function node {fid!r}")

    out_deg: dict[str, int] = {}
    in_deg: dict[str, int] = {}
    for source, target in edges:
        out_deg[source] = out_deg.get(source, 0) + 1
        in_deg[target] = in_deg.get(target, 0) + 1

    nodes: list[Node] = []
    for nid in order:
        kind, label, ctype = raw[nid]
        if kind is NodeKind.CONNECTOR:
            ind, outd = in_deg.get(nid, 0), out_deg.get(nid, 0)
            if ind >= 2 and outd >= 2:
                raise ConnectorDegreeError(
                    f"connector {nid!r} both joins ({ind} in) and splits ({outd} out)")
            role = ConnectorRole.SPLIT if outd >= 2 else ConnectorRole.JOIN
            nodes.append(Node(nid, kind, label, connector_type=ctype,
                              connector_role=role))
        else:
            nodes.append(Node(nid, kind, label,
                              data_refs=tuple(data_refs.get(nid, ())),
                              roles=tuple(roles.get(nid, ()))))
    return ProcessGraph(name, Notation.EPC, nodes, edges)


_NODE_KINDS = {k.value: k for k in NodeKind}
_CONNECTOR_TYPES = {t.value: t for t in ConnectorType}
_CONNECTOR_ROLES = {r.value: r for r in ConnectorRole}
_REF_DIRECTIONS = {d.value: d for d in RefDirection}
_NOTATIONS = {n.value: n for n in Notation}


def _require(mapping: dict, key: str, path: str, expected: type | tuple[type, ...]):
    if key not in mapping:
        raise SchemaViolationError("missing required key", f"{path}.{key}")
    value = mapping[key]
    if not isinstance(value, expected):
        raise SchemaViolationError(f"wrong type for {key!r}", f"{path}.{key}")
    return value


def _lookup(table: dict, value: str, path: str):
    try:
        return table[value]
    except KeyError:
        raise SchemaViolationError(
            f"unknown value {value!r}, expected one of {sorted(table)}", path) from None


def parse_native(document: bytes, warnings: list[str] | None = None) -> ProcessGraph:
    """Deserialize the native JSON schema, version "1". No normalization."""
    try:
        data = json.loads(document.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedJsonError(f"malformed JSON: {exc}") from None
    if not isinstance(data, dict) or "process_graph" not in data:
        raise SchemaViolationError('missing top-level "process_graph" object', "$")
    pg = data["process_graph"]
    if not isinstance(pg, dict):
        raise SchemaViolationError('"process_graph" must be an object', "$.process_graph")
    path = "$.process_graph"

    version = _require(pg, "version", path, str)
    if version != SCHEMA_VERSION:
        raise SchemaViolationError(
            f"unsupported schema version {version!r}, expected {SCHEMA_VERSION!r}",
            f"{path}.version")
    name = _require(pg, "name", path, str)
    notation = _lookup(_NOTATIONS, _require(pg, "notation", path, str),
                       f"{path}.notation")

    raw_nodes = _require(pg, "nodes", path, list)
    nodes: list[Node] = []
    seen: set[str] = set()
    for i, item in enumerate(raw_nodes):
        npath = f"{path}.nodes[{i}]"
        if not isinstance(item, dict):
            raise SchemaViolationError("node must be an object", npath)
        nid = _require(item, "id", npath, str)
        if nid in seen:
            raise SchemaViolationError(f"duplicate node id {nid!r}", f"{npath}.id")
        seen.add(nid)
        kind = _lookup(_NODE_KINDS, _require(item, "kind", npath, str), f"{npath}.kind")
        label = item.get("label", "")
        if not isinstance(label, str):
            raise SchemaViolationError('"label" must be a string', f"{npath}.label")
        ctype = crole = None
        if "connector_type" in item:
            ctype = _lookup(_CONNECTOR_TYPES,
                            _require(item, "connector_type", npath, str),
                            f"{npath}.connector_type")
        if "connector_role" in item:
            crole = _lookup(_CONNECTOR_ROLES,
                            _require(item, "connector_role", npath, str),
                            f"{npath}.connector_role")
        refs: list[DataObjectRef] = []
        for j, raw_ref in enumerate(item.get("data_refs", ())):
            rpath = f"{npath}.data_refs[{j}]"
            if not isinstance(raw_ref, dict):
                raise SchemaViolationError("data ref must be an object", rpath)
            state = raw_ref.get("state")
            if state is not None and not isinstance(state, str):
                raise SchemaViolationError('"state" must be a string or null',
                                           f"{rpath}.state")
            refs.append(DataObjectRef(
                _require(raw_ref, "object_name", rpath, str), state,
                _lookup(_REF_DIRECTIONS, raw_ref.get("direction", "Output"),
                        f"{rpath}.direction")))
        raw_roles = item.get("roles", ())
        if not isinstance(raw_roles, (list, tuple)) or not all(
                isinstance(r, str) for r in raw_roles):
            raise SchemaViolationError('"roles" must be an array of strings',
                                       f"{npath}.roles")
        synthetic = item.get("synthetic", False)
        if not isinstance(synthetic, bool):
            raise SchemaViolationError('"synthetic" must be a boolean',
                                       f"{npath}.synthetic")
        nodes.append(Node(nid, kind, label, connector_type=ctype,
                          connector_role=crole, data_refs=tuple(refs),
                          roles=tuple(raw_roles), synthetic=synthetic))

    raw_edges = _require(pg, "edges", path, list)
    edges: list[tuple[str, str]] = []
    for i, item in enumerate(raw_edges):
        epath = f"{path}.edges[{i}]"
        if (not isinstance(item, list) or len(item) != 2
                or not all(isinstance(e, str) for e in item)):
            raise SchemaViolationError(
                "edge must be a [source, target] pair of strings", epath)
        edges.append((item[0], item[1]))

    return ProcessGraph(name, notation, nodes, edges)


def _node_to_json(node: Node) -> dict:
    out: dict = {"id": node.id, "kind": node.kind.value, "label": node.label}
    if node.connector_type is not None:
        out["connector_type"] = node.connector_type.value
    if node.connector_role is not None:
        out["connector_role"] = node.connector_role.value
    if node.data_refs:
        out["data_refs"] = [
            {"object_name": ref.object_name, "state": ref.state,
             "direction": ref.direction.value}
            for ref in node.data_refs
        ]
    if node.roles:
        out["roles"] = list(node.roles)
    if node.synthetic:
        out["synthetic"] = True
    return out


def export_native(graph: ProcessGraph) -> bytes:
    """Serialize to the native schema: sorted keys, sorted nodes and edges,
    UTF-8, trailing newline. Byte-deterministic for equal graphs."""
    doc = {
        "process_graph": {
            "version": SCHEMA_VERSION,
            "name": graph.name,
            "notation": graph.notation.value,
            "nodes": [_node_to_json(graph.nodes[nid]) for nid in sorted(graph.nodes)],
            "edges": [list(edge) for edge in sorted(graph.edges)],
        }
    }
    text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


_PARSERS = {
    FormatTag.PNML: parse_pnml,
    FormatTag.EPML: parse_epml,
    FormatTag.NATIVE_JSON: parse_native,
}


def parse_document(document: bytes,
                   warnings: list[str] | None = None) -> ProcessGraph:
    """Detect the format and dispatch to the matching parser."""
    return _PARSERS[detect_format(document)](document, warnings)
