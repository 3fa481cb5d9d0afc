"""In-memory object-centric event log model.

The log is a plain value: every transformation in :mod:`ocellens.ops`
returns a fresh ``OcelLog`` and never mutates its input, so logs can be
shared freely across threads and kept on version stacks. Identifiers are
case-sensitive strings compared byte-wise.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Iterator

# ---------------------------------------------------------------------------
# Timestamps
# ---------------------------------------------------------------------------

_RFC3339 = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt ](\d{2}):(\d{2}):(\d{2})(?:\.(\d{1,9}))?"
    r"(?:([Zz])|([+-])(\d{2}):(\d{2}))?$"
)


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime.

    Offsets are converted to UTC; a missing offset is read as UTC.
    Fractional seconds beyond microseconds are truncated.
    """
    m = _RFC3339.match(text)
    if m is None:
        raise ValueError(f"not an RFC 3339 timestamp: {text!r}")
    year, month, day, hour, minute, second = (int(m.group(i)) for i in range(1, 7))
    frac = m.group(7) or ""
    micro = int(frac.ljust(6, "0")[:6]) if frac else 0
    dt = datetime(year, month, day, hour, minute, second, micro, tzinfo=timezone.utc)
    if m.group(9):
        sign = -1 if m.group(9) == "-" else 1
        offset_min = sign * (int(m.group(10)) * 60 + int(m.group(11)))
        from datetime import timedelta

        dt -= timedelta(minutes=offset_min)
    return dt


def render_rfc3339(dt: datetime) -> str:
    """Render an aware datetime canonically: UTC, ``Z`` suffix, minimal fraction."""
    if dt.tzinfo is None:
        raise ValueError("naive datetime cannot be rendered canonically")
    dt = dt.astimezone(timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        base += (".%06d" % dt.microsecond).rstrip("0")
    return base + "Z"


def _as_utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return dt.astimezone(timezone.utc)


# ---------------------------------------------------------------------------
# Attribute values
# ---------------------------------------------------------------------------

TEXT = "text"
INTEGER = "integer"
REAL = "real"
BOOLEAN = "boolean"
TIMESTAMP = "timestamp"

_TAGS = (TEXT, INTEGER, REAL, BOOLEAN, TIMESTAMP)
_INT_CANONICAL = re.compile(r"^-?(0|[1-9][0-9]*)$")


@dataclass(frozen=True)
class AttributeValue:
    """Tagged scalar: text, integer, real, boolean, or timestamp.

    Reals must be finite; timestamps are normalized to UTC at construction.
    """

    tag: str
    value: str | int | float | bool | datetime

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown value tag {self.tag!r}")
        v = self.value
        ok = {
            TEXT: lambda: isinstance(v, str),
            BOOLEAN: lambda: isinstance(v, bool),
            INTEGER: lambda: isinstance(v, int) and not isinstance(v, bool),
            REAL: lambda: isinstance(v, float) and math.isfinite(v),
            TIMESTAMP: lambda: isinstance(v, datetime),
        }[self.tag]()
        if not ok:
            raise ValueError(f"value {v!r} does not fit tag {self.tag!r}")
        if self.tag == TIMESTAMP:
            object.__setattr__(self, "value", _as_utc(v))

    @staticmethod
    def text(v: str) -> "AttributeValue":
        return AttributeValue(TEXT, v)

    @staticmethod
    def integer(v: int) -> "AttributeValue":
        return AttributeValue(INTEGER, v)

    @staticmethod
    def real(v: float) -> "AttributeValue":
        return AttributeValue(REAL, v)

    @staticmethod
    def boolean(v: bool) -> "AttributeValue":
        return AttributeValue(BOOLEAN, v)

    @staticmethod
    def timestamp(v: datetime) -> "AttributeValue":
        return AttributeValue(TIMESTAMP, v)

    def render(self) -> str:
        """Canonical text form: verbatim text, base-10 integers, shortest
        round-trip reals, ``true``/``false``, RFC 3339 UTC timestamps."""
        if self.tag == TEXT:
            return self.value
        if self.tag == INTEGER:
            return str(self.value)
        if self.tag == REAL:
            return repr(self.value)
        if self.tag == BOOLEAN:
            return "true" if self.value else "false"
        return render_rfc3339(self.value)


def recognize_value(text: str) -> AttributeValue:
    """Inverse of :meth:`AttributeValue.render` on canonical forms.

    A string is claimed by a non-text tag only when re-rendering under that
    tag reproduces it exactly ("5" is an integer, "5.00" is text). Text that
    happens to be in a canonical non-text form cannot round-trip; see the
    grammar notes in the README.
    """
    if _INT_CANONICAL.match(text):
        return AttributeValue.integer(int(text))
    try:
        f = float(text)
        if math.isfinite(f) and repr(f) == text:
            return AttributeValue.real(f)
    except ValueError:
        pass
    if text == "true":
        return AttributeValue.boolean(True)
    if text == "false":
        return AttributeValue.boolean(False)
    try:
        dt = parse_rfc3339(text)
        if render_rfc3339(dt) == text:
            return AttributeValue.timestamp(dt)
    except ValueError:
        pass
    return AttributeValue.text(text)


# ---------------------------------------------------------------------------
# Composite types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompositeObjectType:
    """Object type refined by zero or more drill steps.

    ``drills`` is a stack: drill-down appends one ``(attribute, value)``
    pair, roll-up pops the last one. Equality is structural over the base
    name and the full stack.
    """

    base: str
    drills: tuple[tuple[str, AttributeValue], ...] = ()

    def extend(self, attribute: str, value: AttributeValue) -> "CompositeObjectType":
        return CompositeObjectType(self.base, self.drills + ((attribute, value),))

    @property
    def is_base(self) -> bool:
        return not self.drills

    def prefixes(self) -> Iterator["CompositeObjectType"]:
        """Self first, then each ancestor up to the bare base type."""
        for n in range(len(self.drills), -1, -1):
            yield CompositeObjectType(self.base, self.drills[:n])


@dataclass(frozen=True)
class CompositeEventType:
    """Event type refined by zero or more unfold steps.

    ``unfolds`` grows by exactly one object type per unfold and shrinks by
    one per fold, last entry first.
    """

    base: str
    unfolds: tuple[CompositeObjectType, ...] = ()

    def extend(self, otype: CompositeObjectType) -> "CompositeEventType":
        return CompositeEventType(self.base, self.unfolds + (otype,))

    @property
    def is_base(self) -> bool:
        return not self.unfolds

    def prefixes(self) -> Iterator["CompositeEventType"]:
        for n in range(len(self.unfolds), -1, -1):
            yield CompositeEventType(self.base, self.unfolds[:n])


# ---------------------------------------------------------------------------
# Events, objects, and the log
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=True)
class Event:
    id: str
    etype: CompositeEventType
    time: datetime
    attrs: dict[str, AttributeValue] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "time", _as_utc(self.time))


@dataclass(frozen=True, eq=True)
class ObjectEntity:
    """An object with a per-attribute value history (ascending timestamps)."""

    id: str
    otype: CompositeObjectType
    attrs: dict[str, tuple[tuple[datetime, AttributeValue], ...]] = field(
        default_factory=dict
    )


@dataclass(eq=True)
class OcelLog:
    """The full log value: entities, type universes, typings, relations.

    ``eatype`` and ``oatype`` map attribute names to *sets* of types: a
    drilled or unfolded log legitimately types one attribute name for
    several composite types at once, with the plain one-type case as the
    singleton. Treat instances as immutable.
    """

    events: dict[str, Event] = field(default_factory=dict)
    objects: dict[str, ObjectEntity] = field(default_factory=dict)
    etypes: frozenset[CompositeEventType] = frozenset()
    otypes: frozenset[CompositeObjectType] = frozenset()
    eatype: dict[str, frozenset[CompositeEventType]] = field(default_factory=dict)
    oatype: dict[str, frozenset[CompositeObjectType]] = field(default_factory=dict)
    e2o: frozenset[tuple[str, str, str]] = frozenset()
    o2o: frozenset[tuple[str, str, str]] = frozenset()

    @staticmethod
    def empty() -> "OcelLog":
        return OcelLog()

    def but(self, **changes) -> "OcelLog":
        """A copy with the given fields replaced (value semantics)."""
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]


def _typed_for(prefixes, registered) -> bool:
    return any(p in registered for p in prefixes)


def validate(log: OcelLog) -> ValidationReport:
    """Check every structural invariant; collect all violations.

    The attribute-typing rules are granularity-aware: an attribute recorded
    on an entity is accepted when its name is registered for the entity's
    type *or any ancestor of it* (the type with trailing drill/unfold steps
    removed). On an untransformed log this degenerates to the plain
    one-type-per-attribute discipline.
    """
    out: list[Violation] = []

    def bad(rule: str, message: str, *ids: str):
        out.append(Violation(rule, message, ids))

    shared = set(log.events) & set(log.objects)
    for i in sorted(shared):
        bad("disjoint-ids", f"identifier {i} is both an event and an object", i)

    for eid, ev in log.events.items():
        if ev.id != eid:
            bad("event-id-key", f"event stored under {eid} carries id {ev.id}", eid)
        if ev.etype not in log.etypes:
            bad("undeclared-event-type", f"event {eid} uses undeclared type", eid)
        for attr in ev.attrs:
            if attr not in log.eatype or not _typed_for(
                ev.etype.prefixes(), log.eatype[attr]
            ):
                bad(
                    "unregistered-event-attribute",
                    f"attribute {attr} on event {eid} is not typed for its event type",
                    eid,
                )

    for oid, obj in log.objects.items():
        if obj.id != oid:
            bad("object-id-key", f"object stored under {oid} carries id {obj.id}", oid)
        if obj.otype not in log.otypes:
            bad("undeclared-object-type", f"object {oid} uses undeclared type", oid)
        for attr, history in obj.attrs.items():
            if not history:
                bad("empty-history", f"attribute {attr} on object {oid} has no values", oid)
            if any(b[0] <= a[0] for a, b in zip(history, history[1:])):
                bad(
                    "history-order",
                    f"attribute {attr} on object {oid} is not strictly increasing in time",
                    oid,
                )
            if attr not in log.oatype or not _typed_for(
                obj.otype.prefixes(), log.oatype[attr]
            ):
                bad(
                    "unregistered-object-attribute",
                    f"attribute {attr} on object {oid} is not typed for its object type",
                    oid,
                )

    for eid, qual, oid in log.e2o:
        if eid not in log.events:
            bad("dangling-event-ref", f"dangling event reference {eid}", eid)
        if oid not in log.objects:
            bad("dangling-object-ref", f"dangling object reference {oid}", oid)
    for src, qual, tgt in log.o2o:
        for oid in (src, tgt):
            if oid not in log.objects:
                bad("dangling-o2o-ref", f"dangling object reference {oid}", oid)

    for attr, types in log.eatype.items():
        for t in types:
            if t not in log.etypes:
                bad(
                    "eatype-target-undeclared",
                    f"event attribute {attr} is typed for an undeclared event type",
                    attr,
                )
    for attr, types in log.oatype.items():
        for t in types:
            if t not in log.otypes:
                bad(
                    "oatype-target-undeclared",
                    f"object attribute {attr} is typed for an undeclared object type",
                    attr,
                )

    ordered = tuple(sorted(out, key=lambda v: (v.rule, v.ids, v.message)))
    return ValidationReport(ok=not ordered, violations=ordered)


# ---------------------------------------------------------------------------
# Attribute lookups and the type catalog
# ---------------------------------------------------------------------------


def attribute_value_at(
    obj: ObjectEntity, attr: str, t: datetime
) -> AttributeValue | None:
    """The value with the greatest recorded time <= ``t``, or ``None``."""
    t = _as_utc(t)
    found = None
    for when, value in obj.attrs.get(attr, ()):
        if when <= t:
            found = value
        else:
            break
    return found


@dataclass(frozen=True)
class ObjectTypeNode:
    """One composite object type in the catalog tree."""

    otype: CompositeObjectType
    count: int
    drillable: tuple[str, ...]
    children: tuple["ObjectTypeNode", ...]


@dataclass(frozen=True)
class EventTypeVariant:
    etype: CompositeEventType
    count: int


@dataclass(frozen=True)
class TypeHierarchy:
    """Catalog feeding operation menus: object-type trees and event-type
    variants currently in use, with per-node entity counts."""

    object_types: tuple[tuple[str, ObjectTypeNode], ...]
    event_types: tuple[tuple[str, tuple[EventTypeVariant, ...]], ...]


def _otype_key(t: CompositeObjectType):
    return (t.base, tuple((a, v.render()) for a, v in t.drills))


def _etype_key(t: CompositeEventType):
    return (t.base, tuple(_otype_key(u) for u in t.unfolds))


def type_catalog(log: OcelLog) -> TypeHierarchy:
    """Summarize the granularity lattice currently in use.

    Per base object type: the tree of composite types (children extend the
    parent by one drill step), each with its exact-type object count and the
    attribute names eligible for drill-down there (at least one recorded
    value on an object of that exact type). Missing intermediate nodes are
    synthesized with a zero count so the tree is connected.
    """
    obj_count: dict[CompositeObjectType, int] = {}
    drillable: dict[CompositeObjectType, set[str]] = {}
    for obj in log.objects.values():
        obj_count[obj.otype] = obj_count.get(obj.otype, 0) + 1
        for attr, history in obj.attrs.items():
            if history:
                drillable.setdefault(obj.otype, set()).add(attr)

    by_base: dict[str, set[CompositeObjectType]] = {}
    for t in log.otypes:
        closure = by_base.setdefault(t.base, set())
        closure.update(t.prefixes())

    def build(t: CompositeObjectType, pool: set[CompositeObjectType]) -> ObjectTypeNode:
        kids = sorted(
            (c for c in pool if c.drills[: len(t.drills)] == t.drills
             and len(c.drills) == len(t.drills) + 1),
            key=_otype_key,
        )
        return ObjectTypeNode(
            otype=t,
            count=obj_count.get(t, 0),
            drillable=tuple(sorted(drillable.get(t, ()))),
            children=tuple(build(c, pool) for c in kids),
        )

    object_trees = tuple(
        (base, build(CompositeObjectType(base), pool))
        for base, pool in sorted(by_base.items())
    )

    ev_count: dict[CompositeEventType, int] = {}
    for ev in log.events.values():
        ev_count[ev.etype] = ev_count.get(ev.etype, 0) + 1
    by_ebase: dict[str, list[CompositeEventType]] = {}
    for t in log.etypes:
        by_ebase.setdefault(t.base, []).append(t)
    event_groups = tuple(
        (
            base,
            tuple(
                EventTypeVariant(t, ev_count.get(t, 0))
                for t in sorted(variants, key=_etype_key)
            ),
        )
        for base, variants in sorted(by_ebase.items())
    )
    return TypeHierarchy(object_types=object_trees, event_types=event_groups)
