"""Per-object-type flattening and OC-DFG discovery.

A log is flattened into one event sequence per object; the union of the
directly-follows pairs observed in those sequences, keyed by object type,
is the object-centric directly-follows graph. Timestamp ties are broken by
event id so traces are total orders and discovery is deterministic.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass
from datetime import datetime

from .errors import UnknownObjectType
from .model import CompositeEventType, CompositeObjectType, OcelLog
from .typenames import encode_event_type, encode_object_type


@dataclass(frozen=True)
class ObjectTrace:
    """The time-ordered events related to one object (may be empty)."""

    object_id: str
    otype: CompositeObjectType
    steps: tuple[tuple[str, CompositeEventType, datetime], ...]

    @property
    def is_empty(self) -> bool:
        return not self.steps


@dataclass(frozen=True)
class OcDfg:
    """Event-type nodes plus per-object-type directly-follows arcs.

    ``nodes`` count events once globally; ``arcs`` are keyed by
    (source, target, object type); ``starts``/``ends`` count, per object
    type, the non-empty traces beginning/ending at each event type.
    """

    nodes: dict[CompositeEventType, int]
    arcs: dict[tuple[CompositeEventType, CompositeEventType, CompositeObjectType], int]
    starts: dict[CompositeObjectType, dict[CompositeEventType, int]]
    ends: dict[CompositeObjectType, dict[CompositeEventType, int]]


def flatten(log: OcelLog, ot: CompositeObjectType) -> list[ObjectTrace]:
    """One trace per object of exactly type ``ot``, events sorted by
    (time, id). An event related through several qualifiers appears once;
    objects with no related events yield an empty trace (retained)."""
    if ot not in log.otypes:
        raise UnknownObjectType(encode_object_type(ot))
    members = {oid for oid, obj in log.objects.items() if obj.otype == ot}
    related: dict[str, set[str]] = {oid: set() for oid in members}
    for eid, _, oid in log.e2o:
        if oid in related and eid in log.events:
            related[oid].add(eid)
    traces = []
    for oid in sorted(members):
        events = sorted(
            (log.events[eid] for eid in related[oid]),
            key=lambda e: (e.time, e.id),
        )
        traces.append(
            ObjectTrace(
                object_id=oid,
                otype=ot,
                steps=tuple((e.id, e.etype, e.time) for e in events),
            )
        )
    return traces


def discover_ocdfg(log: OcelLog) -> OcDfg:
    """Union of directly-follows relations over every object type in use."""
    nodes: dict[CompositeEventType, int] = {}
    for event in log.events.values():
        nodes[event.etype] = nodes.get(event.etype, 0) + 1

    arcs: dict = {}
    starts: dict = {}
    ends: dict = {}
    for ot in sorted(log.otypes, key=encode_object_type):
        for trace in flatten(log, ot):
            if trace.is_empty:
                continue
            first = trace.steps[0][1]
            last = trace.steps[-1][1]
            starts.setdefault(ot, {})[first] = starts.get(ot, {}).get(first, 0) + 1
            ends.setdefault(ot, {})[last] = ends.get(ot, {}).get(last, 0) + 1
            for (_, src, _), (_, tgt, _) in zip(trace.steps, trace.steps[1:]):
                key = (src, tgt, ot)
                arcs[key] = arcs.get(key, 0) + 1
    return OcDfg(nodes=nodes, arcs=arcs, starts=starts, ends=ends)


def dfg_to_json(dfg: OcDfg, min_arc_frequency: int = 1) -> dict:
    """Wire form with types encoded as grammar strings, deterministically
    sorted, arcs below the threshold omitted."""
    if min_arc_frequency < 1:
        raise ValueError("min_arc_frequency must be >= 1")
    nodes = [
        {"event_type": encode_event_type(t), "frequency": n}
        for t, n in sorted(dfg.nodes.items(), key=lambda kv: encode_event_type(kv[0]))
    ]
    arcs = sorted(
        (
            {
                "source": encode_event_type(src),
                "target": encode_event_type(tgt),
                "object_type": encode_object_type(ot),
                "frequency": n,
            }
            for (src, tgt, ot), n in dfg.arcs.items()
            if n >= min_arc_frequency
        ),
        key=lambda a: (a["source"], a["target"], a["object_type"]),
    )

    def endpoints(table):
        return sorted(
            (
                {
                    "object_type": encode_object_type(ot),
                    "event_type": encode_event_type(et),
                    "count": n,
                }
                for ot, per in table.items()
                for et, n in per.items()
            ),
            key=lambda e: (e["object_type"], e["event_type"]),
        )

    return {
        "nodes": nodes,
        "arcs": arcs,
        "starts": endpoints(dfg.starts),
        "ends": endpoints(dfg.ends),
    }


# Stable palette for per-object-type arc colors (CRC keeps the choice
# identical across runs and platforms, unlike hash()).
PALETTE = (
    "#4e79a7",
    "#f28e2b",
    "#e15759",
    "#76b7b2",
    "#59a14f",
    "#edc948",
    "#b07aa1",
    "#ff9da7",
    "#9c755f",
    "#bab0ac",
)


def color_for(otype_name: str) -> str:
    return PALETTE[zlib.crc32(otype_name.encode("utf-8")) % len(PALETTE)]


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(
    dfg: OcDfg,
    min_arc_frequency: int = 1,
    color_map: dict[str, str] | None = None,
) -> str:
    """Deterministic Graphviz text: nodes sorted by encoded type name, arcs
    by (source, target, object type), below-threshold arcs omitted, arcs
    colored and labeled per object type."""
    if min_arc_frequency < 1:
        raise ValueError("min_arc_frequency must be >= 1")
    color_map = color_map or {}
    lines = [
        "digraph ocdfg {",
        "  rankdir=LR;",
        "  node [shape=box, style=rounded];",
    ]
    for etype, count in sorted(
        dfg.nodes.items(), key=lambda kv: encode_event_type(kv[0])
    ):
        name = encode_event_type(etype)
        lines.append(
            f"  {_dot_quote(name)} [label={_dot_quote(f'{name} ({count})')}];"
        )
    arcs = sorted(
        (
            (encode_event_type(src), encode_event_type(tgt), encode_object_type(ot), n)
            for (src, tgt, ot), n in dfg.arcs.items()
            if n >= min_arc_frequency
        ),
    )
    for src, tgt, ot, n in arcs:
        color = color_map.get(ot) or color_for(ot)
        lines.append(
            f"  {_dot_quote(src)} -> {_dot_quote(tgt)} "
            f"[label={_dot_quote(f'{ot}: {n}')}, color={_dot_quote(color)}, "
            f"fontcolor={_dot_quote(color)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
