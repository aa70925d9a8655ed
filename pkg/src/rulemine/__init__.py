"""Mine business rules from business process models.

Parse Petri nets (PNML), EPCs (EPML), or the native JSON graph format into
one unified process graph, then detect decision, connector, data-state, and
authorization rules on it.
"""

from .errors import (
    ConnectorDegreeError,
    DanglingArcError,
    DuplicateIdError,
    GraphTooLargeError,
    InvalidFieldsError,
    MalformedJsonError,
    MalformedXmlError,
    ParseError,
    RuleMineError,
    SchemaViolationError,
    UnknownNodeError,
    UnknownStateError,
    UnrecognizedFormatError,
    ValidationFailedError,
    WrongNotationError,
)
from .graph import (
    ConnectorRole,
    ConnectorType,
    DataObjectRef,
    Direction,
    Node,
    NodeKind,
    Notation,
    ProcessGraph,
    RefDirection,
    ValidationIssue,
    ValidationReport,
    neighbors,
    normalize_petri,
    path_exists,
    validate,
)
from .lifecycle import (
    Lifecycle,
    PrecedencePair,
    brute_force_precedence,
    collect_lifecycles,
    derive_precedence,
    detect_state_order_rules,
    must_precede,
)
from .model_io import (
    FormatTag,
    detect_format,
    export_native,
    parse_document,
    parse_epml,
    parse_native,
    parse_pnml,
)
from .patterns import (
    EXPRESSIBLE,
    BranchBinding,
    PatternMatch,
    detect_authorization_rules,
    detect_connector_rules,
    detect_decision_rules,
    extract_all,
    find_matches,
)
from .rules import (
    BusinessRule,
    Category,
    Conjunction,
    RuleForm,
    RuleSet,
    categorize,
    check_fields,
    render_text,
    rules_from_json,
    to_json,
)

__version__ = "0.1.0"
