import random

import pytest
from hypothesis import given, strategies as st

from conftest import statements
from tx10.heap import GlobalHeap, digest, is_place_local, make_heap, record
from tx10.parser import parse_program
from tx10.step import (OK, AsyncExc, Done, Running, SyncExc, mask_async, merge_exceptions,
                       observable_semantics, program_transitions, run_trace, trace_records,
                       transitions, wrap)
from tx10.syntax import (WRAPPER_LABEL, Async, DynAt, Exc, Finish, Oid, Seq, Skip, Spawned,
                         Throw, erase_labels, is_async, is_sync, show)

G = GlobalHeap.empty(3)
E = Exc("E")


def steps(s, g=G, p=0):
    return [(t.rule_chain, str(t.label), show(t.target) if t.target else None)
            for t in transitions(s, g, p)]


@pytest.mark.parametrize("lab, expected", [
    (OK, OK), (SyncExc("E"), AsyncExc("E")), (AsyncExc("BF"), AsyncExc("BF"))])
def test_mask_async(lab, expected):
    assert mask_async(lab) == expected


@pytest.mark.parametrize("mu, lab, expected", [
    (set(), OK, set()), (set(), SyncExc("E"), {"E"}), ({"E"}, AsyncExc("E"), {"E"})])
def test_merge_exceptions(mu, lab, expected):
    assert merge_exceptions(frozenset(mu), lab) == expected


def test_spawn():
    assert steps(Async(Skip())) == [("Spawn", "ok", "spawned { skip; }")]


def test_end_of_finish_with_collected_exception():
    [t] = transitions(Finish(frozenset({"E"}), Skip()), G, 0)
    assert (t.rule, t.label, t.target, t.result) == ("End of Finish", SyncExc("E"), None, G)


def test_spawned_left_component_races_with_the_right():
    got = steps(Seq(Spawned(Skip()), Throw(E)))
    assert sorted(got) == [("Par/Exception", "E!", "spawned { skip; }"),
                           ("Seq/Async/Skip", "ok", "throw E;")]


def test_done_is_terminal():
    assert program_transitions(Done(G)) == []
    [t] = program_transitions(Running(Skip(), G))
    assert (t.rule, t.label, t.target_config) == ("Skip", OK, Done(G))


def test_wrapper_shape():
    w = wrap(Skip(1))
    assert w == Finish(frozenset(), DynAt(0, Seq(Skip(1), Skip(0), 0), 0), 0)
    assert w.label == WRAPPER_LABEL
    [t] = program_transitions(Running(w, G))
    assert t.rule_chain.startswith("Finish/At/")


def test_skip_trace_ends_done_with_initial_heap():
    trace = run_trace(parse_program("skip;"), G)
    assert isinstance(trace.final, Done) and trace.final.heap == G
    assert len(trace.steps) == 2


def test_throw_surfaces_from_the_outer_finish():
    trace = run_trace(parse_program("throw E;"), G)
    last = trace.steps[-1]
    assert last.rule == "End of Finish" and last.label == SyncExc("E")


def test_field_update_to_a_missing_field_throws_bf():
    g = make_heap({0: {Oid(0, 0): {"f": E}}})
    s = erase_labels(parse_program("val x = E in { skip; }"))
    assert steps(s, g)[0][0].startswith("Declare Val")
    t = erase_labels(parse_program("o(0,0).g = E;", allow_dynamic=True))
    assert [lab for _, lab, _ in steps(t, g)] == ["BF!"]
    u = erase_labels(parse_program("o(0,5).f = E;", allow_dynamic=True))
    assert [lab for _, lab, _ in steps(u, g)] == ["BF!"]


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_random_runs_are_reproducible(seed):
    program = parse_program("finish { async { skip; } async { throw E; } skip; }")
    a = trace_records(run_trace(program, G, "seeded-random", seed))
    b = trace_records(run_trace(program, G, "seeded-random", seed))
    assert a == b


def test_observable_semantics_of_skip():
    assert observable_semantics(parse_program("skip;"), G) == ({(G, G)}, False)


def test_observable_semantics_of_allocation():
    pairs, _ = observable_semantics(parse_program("val x = {} in { skip; }"), G)
    [(_, g)] = pairs
    assert len(g[0]) == 1


@pytest.mark.parametrize("values, outcomes", [(("E", "BF"), 2), (("E", "E"), 1)])
def test_racing_updates(values, outcomes):
    a, b = values
    program = parse_program(
        f"val x = {{f: DP}} in {{ finish {{ async {{ x.f = {a}; }} async {{ x.f = {b}; }} }} }}")
    pairs, bound = observable_semantics(program, G)
    assert not bound
    assert len(pairs) == outcomes
    assert {digest(g) for _, g in pairs} >= {f"0:[o(0,0){{f:{b}}}] 1:[] 2:[]"}


def test_at_copies_the_captured_object():
    program = parse_program("val x = {f: E} in { at (1) val y = x { y.f = BF; } }")
    final = run_trace(program, G).final
    assert final.heap[0][Oid(0, 0)] == record({"f": E})
    assert final.heap[1][Oid(1, 0)] == record({"f": Exc("BF")})


def test_valof_at_home_and_away():
    ok = parse_program("val x = {f: E} in { val r = globalref x in "
                       "{ at (1) val y = r { at (0) val z = y { (valof z).f = BF; } } } }")
    assert run_trace(ok, G).final.heap[0][Oid(0, 0)] == record({"f": Exc("BF")})
    bad = parse_program("val x = {f: E} in { val r = globalref x in "
                        "{ at (1) val y = r { (valof y).f = BF; } } }")
    assert run_trace(bad, G).steps[-1].label == SyncExc("E")


# ------------------------------------------------------------ properties

@given(statements(dynamic=True))
def test_no_stuck_statement(s):
    assert transitions(s, G, 0)


@given(statements(dynamic=True))
def test_step_properties(s):
    ts = transitions(s, G, 0)
    assert ts == transitions(s, G, 0)
    for t in ts:
        assert is_place_local(t.result) is None
        if t.label.kind == "sync":
            assert is_sync(s)
            assert t.target is None or is_async(t.target)
        if is_async(s):
            assert t.target is None or is_async(t.target)


@given(st.integers(0, 2**32 - 1))
def test_finish_shields_intermediate_labels(seed):
    from tx10.generate import random_stmt
    body = random_stmt(random.Random(seed), 6, dynamic=True)
    for t in transitions(Finish(frozenset(), body), G, 0):
        if t.rule == "Finish":
            assert t.label == OK
