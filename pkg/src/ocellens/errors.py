"""Exception hierarchy shared across the library, CLI, and HTTP service."""
from __future__ import annotations


class OcellensError(Exception):
    """Base class for all errors raised by this package."""


class MalformedTypeName(OcellensError):
    """A flat type-name string does not conform to the encoding grammar."""


class JsonSyntaxError(OcellensError):
    """The input is not well-formed JSON."""


class SchemaError(OcellensError):
    """The JSON document does not match the OCEL 2.0 exchange schema."""


class ValidationError(OcellensError):
    """A log failed structural validation; carries the full report."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(v.message for v in report.violations[:5])
        more = len(report.violations) - 5
        if more > 0:
            lines += f"; and {more} more"
        super().__init__(f"invalid log: {lines}")


class OperationError(OcellensError):
    """Base class for errors raised by the granularity operations."""


class UnknownObjectType(OperationError):
    pass


class UnknownEventType(OperationError):
    pass


class UnknownAttribute(OperationError):
    pass


class MalformedRequest(OperationError):
    """An operation request is missing fields or carries extraneous ones."""
