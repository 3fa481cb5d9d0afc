"""The four granularity operations: drill-down, roll-up, unfold, fold.

All four are pure log-to-log transformations. They rewrite type
assignments and the type universes only; event and object populations,
identifiers, timestamps, attribute values, and both relation sets pass
through untouched. Guards are always evaluated against the input log, so
each operation is a single batch rewrite.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import (
    MalformedRequest,
    UnknownAttribute,
    UnknownEventType,
    UnknownObjectType,
)
from .model import CompositeEventType, CompositeObjectType, OcelLog
from .typenames import (
    decode_event_type,
    decode_object_type,
    encode_event_type,
    encode_object_type,
)

DRILL_DOWN = "drill-down"
ROLL_UP = "roll-up"
UNFOLD = "unfold"
FOLD = "fold"
KINDS = (DRILL_DOWN, ROLL_UP, UNFOLD, FOLD)

# Qualifier filter meaning "every qualifier" (the common case).
ALL_QUALIFIERS = None


def drill_down(log: OcelLog, ot: CompositeObjectType, oa: str) -> OcelLog:
    """Refine objects of type ``ot`` into ``ot + (oa, value)`` composites.

    Each object of exactly type ``ot`` with a recorded value for ``oa``
    moves to the composite extended by its latest value; objects without a
    value keep their type. The new composites are added to the object-type
    universe and to the typing of ``oa``.
    """
    if ot not in log.otypes:
        raise UnknownObjectType(encode_object_type(ot))
    registered = log.oatype.get(oa)
    if not registered or not any(p in registered for p in ot.prefixes()):
        raise UnknownAttribute(f"{oa} is not typed for {encode_object_type(ot)}")

    new_objects = dict(log.objects)
    added: set[CompositeObjectType] = set()
    for oid, obj in log.objects.items():
        if obj.otype != ot:
            continue
        history = obj.attrs.get(oa)
        if not history:
            continue
        latest = history[-1][1]
        composite = ot.extend(oa, latest)
        added.add(composite)
        new_objects[oid] = replace(obj, otype=composite)
    if not added:
        return log
    return log.but(
        objects=new_objects,
        otypes=log.otypes | added,
        oatype={**log.oatype, oa: log.oatype[oa] | added},
    )


def _is_drill_child(t: CompositeObjectType, ot: CompositeObjectType, oa: str) -> bool:
    return (
        t.base == ot.base
        and len(t.drills) == len(ot.drills) + 1
        and t.drills[: len(ot.drills)] == ot.drills
        and t.drills[-1][0] == oa
    )


def roll_up(log: OcelLog, ot: CompositeObjectType, oa: str) -> OcelLog:
    """Undo a drill-down: revert ``ot + (oa, value)`` objects to ``ot``.

    An object reverts when its type extends ``ot`` by one ``(oa, value)``
    step and that value is among its recorded values for ``oa`` (the drill
    value, regardless of later changes). Composite types of that shape left
    with zero objects are dropped from the universe and from the typing of
    ``oa``. Non-matching logs pass through unchanged.
    """
    new_objects = dict(log.objects)
    reverted = False
    for oid, obj in log.objects.items():
        t = obj.otype
        if not _is_drill_child(t, ot, oa):
            continue
        drilled_value = t.drills[-1][1]
        if any(value == drilled_value for _, value in obj.attrs.get(oa, ())):
            new_objects[oid] = replace(obj, otype=ot)
            reverted = True

    in_use = {obj.otype for obj in new_objects.values()}
    removed = {
        t for t in log.otypes if _is_drill_child(t, ot, oa) and t not in in_use
    }
    if not reverted and not removed:
        return log

    new_otypes = log.otypes - removed
    new_oatype = dict(log.oatype)
    if oa in new_oatype:
        new_oatype[oa] = new_oatype[oa] - removed
    if reverted:
        new_otypes |= {ot}
        # Reverted objects carry oa; keep its typing satisfiable.
        if not any(p in new_oatype.get(oa, frozenset()) for p in ot.prefixes()):
            new_oatype[oa] = new_oatype.get(oa, frozenset()) | {ot}
    return log.but(objects=new_objects, otypes=new_otypes, oatype=new_oatype)


def unfold(
    log: OcelLog,
    et: CompositeEventType,
    ot: CompositeObjectType,
    qualifiers: frozenset[str] | None = ALL_QUALIFIERS,
) -> OcelLog:
    """Refine events of type ``et`` related to ``ot`` objects into
    ``et + ot`` composites.

    An event is affected when some E2O relation links it, under a qualifier
    in ``qualifiers`` (``None`` = all), to an object of exactly type ``ot``.
    Affected events move to the composite type (appended once per event, no
    matter how many relations match); every event attribute with a value on
    an affected event gains the composite in its typing. Events outside the
    set, all objects, and both relation sets are untouched.
    """
    if et not in log.etypes:
        raise UnknownEventType(encode_event_type(et))
    if ot not in log.otypes:
        raise UnknownObjectType(encode_object_type(ot))

    affected: set[str] = set()
    for eid, qualifier, oid in log.e2o:
        if qualifiers is not ALL_QUALIFIERS and qualifier not in qualifiers:
            continue
        if eid not in log.events or oid not in log.objects:
            continue
        if log.events[eid].etype == et and log.objects[oid].otype == ot:
            affected.add(eid)
    if not affected:
        return log

    composite = et.extend(ot)
    new_events = dict(log.events)
    new_eatype = dict(log.eatype)
    for eid in affected:
        event = log.events[eid]
        new_events[eid] = replace(event, etype=composite)
        for attr in event.attrs:
            new_eatype[attr] = new_eatype.get(attr, frozenset()) | {composite}
    return log.but(
        events=new_events,
        etypes=log.etypes | {composite},
        eatype=new_eatype,
    )


def fold(log: OcelLog, et: CompositeEventType, ot: CompositeObjectType) -> OcelLog:
    """Undo an unfold: revert ``et + ot`` events to ``et``.

    Only the last unfold entry is matched; undoing an inner layer requires
    folding the outer layers first. Event attributes typed for the
    composite revert alongside, and the composite leaves the event-type
    universe. A log without the composite passes through unchanged.
    """
    composite = et.extend(ot)
    hit_events = [e.id for e in log.events.values() if e.etype == composite]
    hit_attrs = [a for a, types in log.eatype.items() if composite in types]
    if not hit_events and not hit_attrs and composite not in log.etypes:
        return log

    new_events = dict(log.events)
    for eid in hit_events:
        new_events[eid] = replace(log.events[eid], etype=et)
    new_eatype = dict(log.eatype)
    for attr in hit_attrs:
        new_eatype[attr] = (new_eatype[attr] - {composite}) | {et}
    new_etypes = log.etypes - {composite}
    if hit_events or hit_attrs:
        new_etypes |= {et}
    return log.but(events=new_events, etypes=new_etypes, eatype=new_eatype)


# ---------------------------------------------------------------------------
# Uniform request dispatch (CLI and HTTP service)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperationRequest:
    """One of the four operations plus its parameters.

    ``object_type`` is required for every kind; ``attribute`` only for
    drill-down/roll-up; ``event_type`` only for unfold/fold; ``qualifiers``
    only for unfold (``None`` = all qualifiers).
    """

    kind: str
    object_type: CompositeObjectType
    attribute: str | None = None
    event_type: CompositeEventType | None = None
    qualifiers: frozenset[str] | None = None

    def check(self):
        if self.kind not in KINDS:
            raise MalformedRequest(f"unknown operation kind {self.kind!r}")
        if self.object_type is None:
            raise MalformedRequest("object_type is required")
        needs_attr = self.kind in (DRILL_DOWN, ROLL_UP)
        if needs_attr and not self.attribute:
            raise MalformedRequest(f"{self.kind} requires an attribute")
        if not needs_attr and self.attribute is not None:
            raise MalformedRequest(f"{self.kind} does not take an attribute")
        needs_event = self.kind in (UNFOLD, FOLD)
        if needs_event and self.event_type is None:
            raise MalformedRequest(f"{self.kind} requires an event type")
        if not needs_event and self.event_type is not None:
            raise MalformedRequest(f"{self.kind} does not take an event type")
        if self.kind != UNFOLD and self.qualifiers is not None:
            raise MalformedRequest(f"{self.kind} does not take qualifiers")


def apply(log: OcelLog, request: OperationRequest) -> OcelLog:
    """Dispatch a well-formed request to the matching operation."""
    request.check()
    if request.kind == DRILL_DOWN:
        return drill_down(log, request.object_type, request.attribute)
    if request.kind == ROLL_UP:
        return roll_up(log, request.object_type, request.attribute)
    if request.kind == UNFOLD:
        return unfold(log, request.event_type, request.object_type, request.qualifiers)
    return fold(log, request.event_type, request.object_type)


def request_to_json(request: OperationRequest) -> dict:
    """Wire form: composite types as encoded strings, qualifiers sorted."""
    doc: dict = {
        "kind": request.kind,
        "object_type": encode_object_type(request.object_type),
    }
    if request.attribute is not None:
        doc["attribute"] = request.attribute
    if request.event_type is not None:
        doc["event_type"] = encode_event_type(request.event_type)
    if request.qualifiers is not None:
        doc["qualifiers"] = sorted(request.qualifiers)
    return doc


def request_from_json(doc) -> OperationRequest:
    """Parse and check a wire-form request; raises MalformedRequest."""
    if not isinstance(doc, dict):
        raise MalformedRequest("request body must be a JSON object")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise MalformedRequest(f"unknown operation kind {kind!r}")
    unknown = set(doc) - {"kind", "object_type", "attribute", "event_type", "qualifiers"}
    if unknown:
        raise MalformedRequest(f"unknown request fields {sorted(unknown)}")

    def _decode(field, decoder):
        raw = doc.get(field)
        if raw is None:
            return None
        if not isinstance(raw, str):
            raise MalformedRequest(f"{field} must be a string")
        try:
            return decoder(raw)
        except Exception as exc:
            raise MalformedRequest(f"bad {field}: {exc}") from exc

    object_type = _decode("object_type", decode_object_type)
    if object_type is None:
        raise MalformedRequest("object_type is required")
    event_type = _decode("event_type", decode_event_type)
    attribute = doc.get("attribute")
    if attribute is not None and not isinstance(attribute, str):
        raise MalformedRequest("attribute must be a string")
    qualifiers = doc.get("qualifiers")
    if qualifiers is not None:
        if not isinstance(qualifiers, list) or not all(
            isinstance(q, str) for q in qualifiers
        ):
            raise MalformedRequest("qualifiers must be a list of strings")
        qualifiers = frozenset(qualifiers)
    request = OperationRequest(
        kind=kind,
        object_type=object_type,
        attribute=attribute,
        event_type=event_type,
        qualifiers=qualifiers,
    )
    request.check()
    return request
