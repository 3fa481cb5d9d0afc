import random

import pytest
from hypothesis import given, settings, strategies as st

from corpus import random_log, random_op_sequence
from oracle import brute_force_dfg
from ocellens import ops
from ocellens.discovery import dfg_to_json, discover_ocdfg, flatten, render_dot
from ocellens.errors import UnknownObjectType
from ocellens.model import CompositeObjectType, OcelLog
from ocellens.typenames import decode_object_type

ECG = decode_object_type("Test~type=ECG")
BLOOD = decode_object_type("Test~type=Blood")


def arc_names(dfg, encode=True):
    from ocellens.typenames import encode_event_type, encode_object_type

    return {
        (encode_event_type(s), encode_event_type(t), encode_object_type(o)): n
        for (s, t, o), n in dfg.arcs.items()
    }


# --- flatten -----------------------------------------------------------------


def test_flatten_patient_trace(running, types):
    traces = flatten(running, types["Patient"])
    assert len(traces) == 1
    assert [step[0] for step in traces[0].steps] == ["e1", "e2", "e3", "e4", "e5"]
    assert [step[1].base for step in traces[0].steps] == ["rp", "ot", "rt", "ot", "rt"]


def test_flatten_test_traces(running, types):
    traces = {t.object_id: [s[0] for s in t.steps] for t in flatten(running, types["Test"])}
    assert traces == {"o2": ["e2", "e3"], "o3": ["e4", "e5"]}


def test_flatten_retains_empty_traces(running, types):
    isolated = running.objects["o2"]
    log = running.but(
        e2o=frozenset(r for r in running.e2o if r[2] != "o2"),
    )
    traces = {t.object_id: t for t in flatten(log, types["Test"])}
    assert traces["o2"].is_empty
    assert not traces["o3"].is_empty


def test_flatten_no_objects_and_unknown_type(running, types):
    drilled = ops.drill_down(running, types["Test"], "type")
    assert flatten(drilled, types["Test"]) == []  # in otypes, zero objects
    with pytest.raises(UnknownObjectType):
        flatten(running, CompositeObjectType("Nope"))


def test_flatten_counts_multi_qualifier_events_once(running, types):
    log = running.but(e2o=running.e2o | {("e2", "second", "o2")})
    traces = {t.object_id: [s[0] for s in t.steps] for t in flatten(log, types["Test"])}
    assert traces["o2"] == ["e2", "e3"]


# --- discovery ---------------------------------------------------------------


GOLD_LEFT = {
    ("rp", "ot", "Patient"): 1,
    ("ot", "rt", "Patient"): 2,
    ("rt", "ot", "Patient"): 1,
    ("ot", "rt", "Test"): 2,
}


def test_running_example_dfg(running):
    dfg = discover_ocdfg(running)
    assert arc_names(dfg) == GOLD_LEFT
    assert {t.base: n for t, n in dfg.nodes.items()} == {"rp": 1, "ot": 2, "rt": 2}
    patient = CompositeObjectType("Patient")
    test = CompositeObjectType("Test")
    assert {t.base: n for t, n in dfg.starts[patient].items()} == {"rp": 1}
    assert {t.base: n for t, n in dfg.ends[patient].items()} == {"rt": 1}
    assert {t.base: n for t, n in dfg.starts[test].items()} == {"ot": 2}
    assert {t.base: n for t, n in dfg.ends[test].items()} == {"rt": 2}


def test_drilled_dfg_splits_test_arcs(running, types):
    drilled = ops.drill_down(running, types["Test"], "type")
    arcs = arc_names(discover_ocdfg(drilled))
    assert arcs[("ot", "rt", "Test~type=ECG")] == 1
    assert arcs[("ot", "rt", "Test~type=Blood")] == 1
    # Patient arcs unchanged
    assert arcs[("rp", "ot", "Patient")] == 1
    assert arcs[("ot", "rt", "Patient")] == 2
    assert arcs[("rt", "ot", "Patient")] == 1
    assert ("ot", "rt", "Test") not in arcs


def test_unfolded_dfg_exposes_test_sequence(running, types):
    log = ops.drill_down(running, types["Test"], "type")
    for et, ot in (("ot", ECG), ("rt", ECG), ("ot", BLOOD), ("rt", BLOOD)):
        log = ops.unfold(log, types[et], ot)
    arcs = arc_names(discover_ocdfg(log))
    chain = [
        ("rp", "ot@Test~type=ECG"),
        ("ot@Test~type=ECG", "rt@Test~type=ECG"),
        ("rt@Test~type=ECG", "ot@Test~type=Blood"),
        ("ot@Test~type=Blood", "rt@Test~type=Blood"),
    ]
    for src, tgt in chain:
        assert arcs[(src, tgt, "Patient")] == 1


def test_node_frequency_counts_events_once(running, types):
    # e2 shared by two objects of the same type must still count once
    log = running.but(e2o=running.e2o | {("e2", "extra", "o3")})
    dfg = discover_ocdfg(log)
    assert dfg.nodes[types["ot"]] == 2


def test_empty_log_dfg():
    dfg = discover_ocdfg(OcelLog.empty())
    assert dfg.nodes == {}
    assert dfg.arcs == {}


# --- DOT and JSON rendering ----------------------------------------------------


def test_dot_contains_labeled_edge(running):
    text = render_dot(discover_ocdfg(running))
    assert '"rp" -> "ot" [label="Patient: 1"' in text
    assert text.startswith("digraph ocdfg {")


def test_dot_threshold_removes_all_arcs(running):
    text = render_dot(discover_ocdfg(running), min_arc_frequency=3)
    assert "->" not in text
    assert '"rp"' in text  # nodes stay


def test_dot_empty_graph_body():
    text = render_dot(discover_ocdfg(OcelLog.empty()))
    assert text == (
        "digraph ocdfg {\n"
        "  rankdir=LR;\n"
        "  node [shape=box, style=rounded];\n"
        "}\n"
    )


def test_dot_rejects_bad_threshold(running):
    with pytest.raises(ValueError):
        render_dot(discover_ocdfg(running), min_arc_frequency=0)


def test_dfg_json_shape_and_threshold(running):
    doc = dfg_to_json(discover_ocdfg(running))
    assert {n["event_type"]: n["frequency"] for n in doc["nodes"]} == {
        "rp": 1,
        "ot": 2,
        "rt": 2,
    }
    assert len(doc["arcs"]) == 4
    assert doc["arcs"] == sorted(
        doc["arcs"], key=lambda a: (a["source"], a["target"], a["object_type"])
    )
    filtered = dfg_to_json(discover_ocdfg(running), min_arc_frequency=2)
    assert {(a["source"], a["target"]) for a in filtered["arcs"]} == {("ot", "rt")}
    assert {s["object_type"] for s in doc["starts"]} == {"Patient", "Test"}


def test_discovery_and_dot_deterministic(running):
    a, b = discover_ocdfg(running), discover_ocdfg(running)
    assert a == b
    assert render_dot(a) == render_dot(b)


# --- quantified properties -----------------------------------------------------


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_brute_force_oracle(seed):
    rng = random.Random(seed)
    log = random_op_sequence(rng, random_log(rng, max_events=8), steps=2)
    dfg = discover_ocdfg(log)
    nodes, arcs, starts, ends = brute_force_dfg(log)
    assert dfg.nodes == nodes
    assert dfg.arcs == arcs
    assert dfg.starts == starts
    assert dfg.ends == ends


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_conservation(seed):
    rng = random.Random(seed)
    log = random_log(rng)
    dfg = discover_ocdfg(log)
    for ot in log.otypes:
        traces = [t for t in flatten(log, ot) if not t.is_empty]
        arc_total = sum(n for (_, _, o), n in dfg.arcs.items() if o == ot)
        assert arc_total == sum(max(len(t.steps) - 1, 0) for t in traces)
        assert sum(dfg.starts.get(ot, {}).values()) == len(traces)
        assert sum(dfg.ends.get(ot, {}).values()) == len(traces)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_removing_a_types_objects_removes_only_its_arcs(seed):
    rng = random.Random(seed)
    log = random_log(rng)
    victim = rng.choice(sorted(log.otypes, key=str))
    keep = {oid for oid, obj in log.objects.items() if obj.otype != victim}
    pruned = log.but(
        objects={oid: log.objects[oid] for oid in keep},
        e2o=frozenset(r for r in log.e2o if r[2] in keep),
        o2o=frozenset(r for r in log.o2o if r[0] in keep and r[2] in keep),
    )
    before = discover_ocdfg(log).arcs
    after = discover_ocdfg(pruned).arcs
    assert after == {k: n for k, n in before.items() if k[2] != victim}
