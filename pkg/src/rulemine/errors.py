"""Exception types shared across the package.

Every exception carries a stable machine-readable ``code`` so the CLI and
tests can match on failure kind without parsing messages.
"""

from __future__ import annotations


class RuleMineError(Exception):
    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class WrongNotationError(RuleMineError):
    code = "WRONG_NOTATION"


class UnknownNodeError(RuleMineError):
    code = "UNKNOWN_NODE"


class UnknownStateError(RuleMineError):
    code = "UNKNOWN_STATE"


class GraphTooLargeError(RuleMineError):
    code = "GRAPH_TOO_LARGE"


class InvalidFieldsError(RuleMineError):
    code = "INVALID_FIELDS"


class ValidationFailedError(RuleMineError):
    """Raised when an operation requires a graph that validates cleanly."""

    code = "VALIDATION_FAILED"

    def __init__(self, message: str = "", report=None):
        super().__init__(message)
        self.report = report


class ParseError(RuleMineError):
    code = "PARSE_ERROR"


class UnrecognizedFormatError(ParseError):
    code = "UNRECOGNIZED_FORMAT"


class MalformedXmlError(ParseError):
    code = "MALFORMED_XML"


class MalformedJsonError(ParseError):
    code = "MALFORMED_JSON"


class SchemaViolationError(ParseError):
    """Structural problem in a native JSON document; ``path`` is a JSON path."""

    code = "SCHEMA_VIOLATION"

    def __init__(self, message: str = "", path: str = "$"):
        self.path = path
        super().__init__(f"{message or 'schema violation'} at {path}")


class DanglingArcError(ParseError):
    code = "DANGLING_ARC"


class DuplicateIdError(ParseError):
    code = "DUPLICATE_ID"


class ConnectorDegreeError(ParseError):
    code = "CONNECTOR_DEGREE"
