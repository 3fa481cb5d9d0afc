"""OCEL 2.0 JSON interchange: permissive reader, canonical writer.

The reader accepts the standard exchange layout (top-level ``objectTypes``,
``eventTypes``, ``objects``, ``events``) and decodes composite type names
through the grammar in :mod:`ocellens.typenames`, so a previously
transformed log reloads with full drill/unfold structure. Unknown
top-level keys are ignored on read and dropped on write.

The writer is canonical: events sorted by (time, id), objects by id, all
JSON object keys sorted, timestamps in RFC 3339 UTC. Equal logs produce
byte-identical output.
"""
from __future__ import annotations

import json
from importlib import resources
from typing import Any

from .errors import JsonSyntaxError, SchemaError, ValidationError
from .model import (
    AttributeValue,
    CompositeEventType,
    CompositeObjectType,
    Event,
    ObjectEntity,
    OcelLog,
    parse_rfc3339,
    render_rfc3339,
    validate,
)
from .typenames import (
    decode_event_type,
    decode_object_type,
    encode_event_type,
    encode_object_type,
)

_DECLARED_KINDS = ("string", "time", "integer", "float", "boolean")
_TAG_TO_KIND = {
    "text": "string",
    "timestamp": "time",
    "integer": "integer",
    "real": "float",
    "boolean": "boolean",
}


def _reject_constant(token: str):
    raise SchemaError(f"non-finite number {token} is not valid OCEL JSON")


def _expect(mapping: Any, key: str, kind: type, where: str):
    if not isinstance(mapping, dict):
        raise SchemaError(f"{where} must be a JSON object")
    if key not in mapping:
        raise SchemaError(f"{where} is missing required key {key!r}")
    value = mapping[key]
    if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
        raise SchemaError(f"{where}.{key} has the wrong JSON type")
    return value


def _get_list(entry: dict, key: str, where: str) -> list:
    value = entry.get(key, [])
    if not isinstance(value, list):
        raise SchemaError(f"{where}.{key} must be a list")
    return value


def _read_declarations(entries: Any, decode, section: str):
    """Parse objectTypes/eventTypes into (types, attr typing, declared kinds)."""
    if not isinstance(entries, list):
        raise SchemaError(f"{section} must be a list")
    types = set()
    typing: dict[str, set] = {}
    kinds: dict[tuple[Any, str], str] = {}
    for entry in entries:
        name = _expect(entry, "name", str, f"{section} entry")
        decoded = decode(name)
        if decoded in types:
            raise SchemaError(f"duplicate {section} declaration {name!r}")
        types.add(decoded)
        for attr in _get_list(entry, "attributes", f"{section} {name!r}"):
            attr_name = _expect(attr, "name", str, f"{section} {name!r} attribute")
            attr_kind = _expect(attr, "type", str, f"{section} {name!r} attribute")
            if attr_kind not in _DECLARED_KINDS:
                raise SchemaError(
                    f"unknown attribute type {attr_kind!r} in {section} {name!r}"
                )
            if (decoded, attr_name) in kinds:
                raise SchemaError(
                    f"attribute {attr_name!r} declared twice for {section} {name!r}"
                )
            kinds[(decoded, attr_name)] = attr_kind
            typing.setdefault(attr_name, set()).add(decoded)
    return types, typing, kinds


def _governing_kind(instance_type, attr: str, typing, kinds) -> str | None:
    """Declared value kind for an attribute, honoring drilled/unfolded types
    by falling back to the nearest ancestor declaration."""
    registered = typing.get(attr)
    if not registered:
        return None
    for prefix in instance_type.prefixes():
        if prefix in registered:
            return kinds.get((prefix, attr), "string")
    return None


def _parse_value(raw: Any, declared: str | None, where: str) -> AttributeValue:
    if isinstance(raw, bool):
        return AttributeValue.boolean(raw)
    if isinstance(raw, int):
        if declared == "float":
            return AttributeValue.real(float(raw))
        return AttributeValue.integer(raw)
    if isinstance(raw, float):
        return AttributeValue.real(raw)
    if isinstance(raw, str):
        if declared == "time":
            try:
                return AttributeValue.timestamp(parse_rfc3339(raw))
            except ValueError as exc:
                raise SchemaError(f"{where}: bad timestamp value {raw!r}") from exc
        return AttributeValue.text(raw)
    raise SchemaError(f"{where}: unsupported JSON value {raw!r}")


def _parse_time(raw: Any, where: str):
    if not isinstance(raw, str):
        raise SchemaError(f"{where} must be an RFC 3339 string")
    try:
        return parse_rfc3339(raw)
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def read_ocel_json(data: bytes | str) -> OcelLog:
    """Parse OCEL 2.0 JSON bytes into a validated log.

    Raises JsonSyntaxError, SchemaError, MalformedTypeName, or
    ValidationError (wrapping the full report) accordingly.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise JsonSyntaxError(f"input is not UTF-8: {exc}") from exc
    try:
        doc = json.loads(data, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise JsonSyntaxError(str(exc)) from exc
    if not isinstance(doc, dict):
        raise SchemaError("top-level JSON value must be an object")
    for key in ("objectTypes", "eventTypes", "objects", "events"):
        if key not in doc:
            raise SchemaError(f"missing required key {key!r}")

    otypes, oatype, okinds = _read_declarations(
        doc["objectTypes"], decode_object_type, "objectTypes"
    )
    etypes, eatype, ekinds = _read_declarations(
        doc["eventTypes"], decode_event_type, "eventTypes"
    )

    objects: dict[str, ObjectEntity] = {}
    o2o = set()
    if not isinstance(doc["objects"], list):
        raise SchemaError("objects must be a list")
    for entry in doc["objects"]:
        oid = _expect(entry, "id", str, "object entry")
        if oid in objects:
            raise SchemaError(f"duplicate object id {oid!r}")
        otype = decode_object_type(_expect(entry, "type", str, f"object {oid!r}"))
        histories: dict[str, list] = {}
        for attr in _get_list(entry, "attributes", f"object {oid!r}"):
            name = _expect(attr, "name", str, f"object {oid!r} attribute")
            when = _parse_time(
                _expect(attr, "time", str, f"object {oid!r} attribute {name!r}"),
                f"object {oid!r} attribute {name!r} time",
            )
            declared = _governing_kind(otype, name, oatype, okinds)
            value = _parse_value(
                attr.get("value"), declared, f"object {oid!r} attribute {name!r}"
            )
            histories.setdefault(name, []).append((when, value))
        for name in histories:
            histories[name].sort(key=lambda pair: pair[0])
        for rel in _get_list(entry, "relationships", f"object {oid!r}"):
            target = _expect(rel, "objectId", str, f"object {oid!r} relationship")
            qualifier = _expect(rel, "qualifier", str, f"object {oid!r} relationship")
            o2o.add((oid, qualifier, target))
        objects[oid] = ObjectEntity(
            id=oid,
            otype=otype,
            attrs={name: tuple(entries) for name, entries in histories.items()},
        )

    events: dict[str, Event] = {}
    e2o = set()
    if not isinstance(doc["events"], list):
        raise SchemaError("events must be a list")
    for entry in doc["events"]:
        eid = _expect(entry, "id", str, "event entry")
        if eid in events:
            raise SchemaError(f"duplicate event id {eid!r}")
        etype = decode_event_type(_expect(entry, "type", str, f"event {eid!r}"))
        when = _parse_time(
            _expect(entry, "time", str, f"event {eid!r}"), f"event {eid!r} time"
        )
        attrs: dict[str, AttributeValue] = {}
        for attr in _get_list(entry, "attributes", f"event {eid!r}"):
            name = _expect(attr, "name", str, f"event {eid!r} attribute")
            if name in attrs:
                raise SchemaError(f"attribute {name!r} repeated on event {eid!r}")
            declared = _governing_kind(etype, name, eatype, ekinds)
            attrs[name] = _parse_value(
                attr.get("value"), declared, f"event {eid!r} attribute {name!r}"
            )
        for rel in _get_list(entry, "relationships", f"event {eid!r}"):
            target = _expect(rel, "objectId", str, f"event {eid!r} relationship")
            qualifier = _expect(rel, "qualifier", str, f"event {eid!r} relationship")
            e2o.add((eid, qualifier, target))
        events[eid] = Event(id=eid, etype=etype, time=when, attrs=attrs)

    log = OcelLog(
        events=events,
        objects=objects,
        etypes=frozenset(etypes),
        otypes=frozenset(otypes),
        eatype={name: frozenset(types) for name, types in eatype.items()},
        oatype={name: frozenset(types) for name, types in oatype.items()},
        e2o=frozenset(e2o),
        o2o=frozenset(o2o),
    )
    report = validate(log)
    if not report.ok:
        raise ValidationError(report)
    return log


def _value_to_json(value: AttributeValue):
    if value.tag == "timestamp":
        return render_rfc3339(value.value)
    return value.value


def _declared_kinds_for_write(log: OcelLog):
    """Pick the declared value kind per (type, attribute) from the values it
    governs; ties break lexicographically, unused declarations say string."""
    tally: dict[tuple[Any, str], dict[str, int]] = {}

    def note(instance_type, attr, tag, typing):
        registered = typing.get(attr, frozenset())
        for prefix in instance_type.prefixes():
            if prefix in registered:
                kinds = tally.setdefault((prefix, attr), {})
                kind = _TAG_TO_KIND[tag]
                kinds[kind] = kinds.get(kind, 0) + 1
                return

    for obj in log.objects.values():
        for attr, history in obj.attrs.items():
            for _, value in history:
                note(obj.otype, attr, value.tag, log.oatype)
    for ev in log.events.values():
        for attr, value in ev.attrs.items():
            note(ev.etype, attr, value.tag, log.eatype)

    def pick(key) -> str:
        kinds = tally.get(key)
        if not kinds:
            return "string"
        best = max(kinds.items(), key=lambda kv: (kv[1], kv[0]))
        return best[0]

    return pick


def write_ocel_json(log: OcelLog) -> bytes:
    """Serialize a valid log to canonical OCEL 2.0 JSON bytes."""
    report = validate(log)
    if not report.ok:
        raise ValidationError(report)
    pick = _declared_kinds_for_write(log)

    object_types = []
    for otype in sorted(log.otypes, key=encode_object_type):
        attrs = sorted(a for a, types in log.oatype.items() if otype in types)
        object_types.append(
            {
                "name": encode_object_type(otype),
                "attributes": [
                    {"name": a, "type": pick((otype, a))} for a in attrs
                ],
            }
        )
    event_types = []
    for etype in sorted(log.etypes, key=encode_event_type):
        attrs = sorted(a for a, types in log.eatype.items() if etype in types)
        event_types.append(
            {
                "name": encode_event_type(etype),
                "attributes": [
                    {"name": a, "type": pick((etype, a))} for a in attrs
                ],
            }
        )

    objects = []
    for oid in sorted(log.objects):
        obj = log.objects[oid]
        attr_entries = [
            {"name": name, "time": render_rfc3339(when), "value": _value_to_json(value)}
            for name in sorted(obj.attrs)
            for when, value in obj.attrs[name]
        ]
        rels = sorted(
            (tgt, qual) for src, qual, tgt in log.o2o if src == oid
        )
        objects.append(
            {
                "id": oid,
                "type": encode_object_type(obj.otype),
                "attributes": attr_entries,
                "relationships": [
                    {"objectId": tgt, "qualifier": qual} for tgt, qual in rels
                ],
            }
        )

    events = []
    for ev in sorted(log.events.values(), key=lambda e: (e.time, e.id)):
        rels = sorted((tgt, qual) for eid, qual, tgt in log.e2o if eid == ev.id)
        events.append(
            {
                "id": ev.id,
                "type": encode_event_type(ev.etype),
                "time": render_rfc3339(ev.time),
                "attributes": [
                    {"name": name, "value": _value_to_json(ev.attrs[name])}
                    for name in sorted(ev.attrs)
                ],
                "relationships": [
                    {"objectId": tgt, "qualifier": qual} for tgt, qual in rels
                ],
            }
        )

    doc = {
        "objectTypes": object_types,
        "eventTypes": event_types,
        "objects": objects,
        "events": events,
    }
    text = json.dumps(doc, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    return text.encode("utf-8")


def running_example() -> OcelLog:
    """The bundled chest-pain evaluation sample log (5 events, 3 objects)."""
    data = resources.files("ocellens").joinpath("data/running_example.jsonocel")
    return read_ocel_json(data.read_bytes())
