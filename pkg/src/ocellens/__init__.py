"""ocellens: a granularity lens for object-centric event logs.

Load OCEL 2.0 JSON, reshape the type structure with drill-down, roll-up,
unfold, and fold, and discover object-centric directly-follows graphs.
"""
from .discovery import OcDfg, ObjectTrace, dfg_to_json, discover_ocdfg, flatten, render_dot
from .errors import (
    JsonSyntaxError,
    MalformedRequest,
    MalformedTypeName,
    OcellensError,
    OperationError,
    SchemaError,
    UnknownAttribute,
    UnknownEventType,
    UnknownObjectType,
    ValidationError,
)
from .model import (
    AttributeValue,
    CompositeEventType,
    CompositeObjectType,
    Event,
    ObjectEntity,
    OcelLog,
    TypeHierarchy,
    ValidationReport,
    attribute_value_at,
    type_catalog,
    validate,
)
from .ocel_json import read_ocel_json, running_example, write_ocel_json
from .ops import (
    ALL_QUALIFIERS,
    OperationRequest,
    apply,
    drill_down,
    fold,
    request_from_json,
    request_to_json,
    roll_up,
    unfold,
)
from .typenames import (
    decode_event_type,
    decode_object_type,
    encode_event_type,
    encode_object_type,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_QUALIFIERS",
    "AttributeValue",
    "CompositeEventType",
    "CompositeObjectType",
    "Event",
    "JsonSyntaxError",
    "MalformedRequest",
    "MalformedTypeName",
    "ObjectEntity",
    "ObjectTrace",
    "OcDfg",
    "OcelLog",
    "OcellensError",
    "OperationError",
    "OperationRequest",
    "SchemaError",
    "TypeHierarchy",
    "UnknownAttribute",
    "UnknownEventType",
    "UnknownObjectType",
    "ValidationError",
    "ValidationReport",
    "apply",
    "attribute_value_at",
    "decode_event_type",
    "decode_object_type",
    "dfg_to_json",
    "discover_ocdfg",
    "drill_down",
    "encode_event_type",
    "encode_object_type",
    "flatten",
    "fold",
    "read_ocel_json",
    "render_dot",
    "request_from_json",
    "request_to_json",
    "roll_up",
    "running_example",
    "type_catalog",
    "unfold",
    "validate",
    "write_ocel_json",
]
