import random

import pytest
from hypothesis import assume, given, strategies as st

from oracles import brute_force_isomorphic, copy_violations, path_isomorphic
from tx10.generate import random_object_graph
from tx10.heap import (DanglingOid, GlobalHeap, LocalHeap, PlaceNotLive, copy, digest,
                       fresh_oids, graph_isomorphic, is_place_local, make_heap, reachable,
                       record, record_set)
from tx10.syntax import Exc, GlobalRef, Oid

E = Exc("E")


@pytest.mark.parametrize("used, count, expected", [
    ([], 1, [(2, 0)]),
    ([0, 1], 2, [(2, 2), (2, 3)]),
    ([0, 2], 2, [(2, 1), (2, 3)]),
])
def test_fresh_oids(used, count, expected):
    h = LocalHeap({Oid(2, n): record() for n in used})
    assert fresh_oids(h, 2, count) == [Oid(*x) for x in expected]


def test_reachable_examples():
    o, w = Oid(0, 0), Oid(3, 1)
    g = make_heap({0: {o: {"f": o, "g": GlobalRef(w)}}, 3: {w: {"h": E}}})
    assert reachable(g, E) == {E}
    assert reachable(g, o) == {o, GlobalRef(w)}
    with pytest.raises(DanglingOid):
        reachable(make_heap({0: {o: {"f": Oid(0, 9)}}}), o)


@pytest.mark.parametrize("spec, ok", [
    ({0: {}}, True),
    ({0: {Oid(1, 0): {}}}, False),
    ({0: {Oid(0, 0): {"f": Oid(1, 7)}}, 1: {Oid(1, 7): {}}}, False),
    ({0: {Oid(0, 0): {"f": GlobalRef(Oid(1, 7))}}, 1: {}}, True),
    ({0: {Oid(0, 0): {"f": Oid(0, 1)}}}, False),
])
def test_is_place_local(spec, ok):
    assert (is_place_local(make_heap(spec)) is None) is ok


def test_place_local_witness_names_the_place():
    assert is_place_local(make_heap({0: {Oid(1, 0): {}}}))[0] == 0


def test_isomorphism_examples():
    a, b = Oid(0, 0), Oid(0, 1)
    single = make_heap({0: {a: {}}})
    other = make_heap({1: {Oid(1, 4): {}}})
    assert graph_isomorphic(single, a, other, Oid(1, 4)) == {a: Oid(1, 4)}
    two_cycle = make_heap({0: {a: {"f": b}, b: {"f": a}}})
    one_cycle = make_heap({0: {a: {"f": a}}})
    assert graph_isomorphic(two_cycle, a, one_cycle, a) is None
    assert not brute_force_isomorphic(two_cycle, a, one_cycle, a)
    r1 = make_heap({0: {a: {"f": GlobalRef(Oid(1, 0))}}})
    r2 = make_heap({0: {a: {"f": GlobalRef(Oid(2, 0))}}})
    assert graph_isomorphic(r1, a, r2, a) is None


def test_copy_of_a_non_oid_is_identity():
    g = GlobalHeap.empty(2)
    assert copy(E, 1, g) == (E, g)


def test_copy_self_loop():
    o = Oid(1, 0)
    g = make_heap({0: {}, 1: {o: {"f": o}}, 2: {}})
    v, g2 = copy(o, 2, g)
    assert v == Oid(2, 0)
    assert g2[2][v] == record({"f": v})
    assert graph_isomorphic(g, o, g2, v) is not None


def test_copy_keeps_global_refs_opaque():
    o, p, w = Oid(1, 0), Oid(1, 1), GlobalRef(Oid(3, 0))
    g = make_heap({1: {o: {"a": w, "b": p}, p: {}}, 2: {}, 3: {Oid(3, 0): {}}})
    v, g2 = copy(o, 2, g)
    assert v == Oid(2, 0)
    assert g2[2][Oid(2, 0)] == record({"a": w, "b": Oid(2, 1)})
    assert g2[2][Oid(2, 1)] == record()
    # a reference homed at the target place is not localised either
    back = GlobalRef(Oid(2, 5))
    g = make_heap({1: {o: {"a": back}}, 2: {Oid(2, 5): {}}})
    v, g2 = copy(o, 2, g)
    assert g2[2][v] == record({"a": back})


def test_copy_fills_serial_gaps_in_visit_order():
    a, b, c = Oid(0, 0), Oid(0, 1), Oid(0, 2)
    g = make_heap({0: {a: {"x": c, "y": b}, b: {}, c: {}},
                   1: {Oid(1, 1): {}}})
    v, g2 = copy(a, 1, g)
    # depth-first in field order: a, then c (field x), then b (field y)
    assert v == Oid(1, 0)
    assert g2[1][Oid(1, 0)] == record({"x": Oid(1, 2), "y": Oid(1, 3)})


def test_copy_errors():
    o = Oid(0, 0)
    g = make_heap({0: {o: {"f": Oid(0, 1)}}, 1: {}})
    with pytest.raises(DanglingOid):
        copy(o, 1, g)
    with pytest.raises(PlaceNotLive):
        copy(o, 1, make_heap({0: {o: {}}}))


def test_digest_is_canonical():
    g = make_heap({1: {Oid(1, 2): {"b": E, "a": GlobalRef(Oid(0, 0))}}, 0: {}})
    assert digest(g) == "0:[] 1:[o(1,2){a:gr(0,0),b:E}]"


def test_record_set_keeps_field_order():
    r = record_set(record({"b": E}), "a", E)
    assert [f for f, _ in r] == ["a", "b"]


def check_copy(g, root, q):
    v, g2 = copy(root, q, g)
    assert copy_violations(g, root, q, v, g2) == []
    return v, g2


@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_copy_contract_on_random_graphs(seed, q):
    g, root = random_object_graph(random.Random(seed))
    assert is_place_local(g) is None
    check_copy(g, root, q)


@given(st.integers(0, 2**32 - 1))
def test_copy_of_copy_is_isomorphic_to_original(seed):
    g, root = random_object_graph(random.Random(seed))
    v, g2 = copy(root, 1, g)
    w, g3 = copy(v, 2, g2)
    assert graph_isomorphic(g, root, g3, w) is not None


@given(st.integers(0, 2**32 - 1))
def test_oracles_agree_on_small_graphs(seed):
    rng = random.Random(seed)
    g1, r1 = random_object_graph(rng, max_nodes=4)
    g2, r2 = random_object_graph(rng, max_nodes=4)
    expected = brute_force_isomorphic(g1, r1, g2, r2)
    assert (graph_isomorphic(g1, r1, g2, r2) is not None) == expected
    assert path_isomorphic(g1, r1, g2, r2) == expected


@given(st.integers(0, 2**32 - 1))
def test_oracles_accept_renamed_graphs(seed):
    from tx10.explore import rename_heap
    rng = random.Random(seed)
    g, root = random_object_graph(rng, max_nodes=5)
    oids = [o for o in g.all_oids() if o.place == 0]
    targets = rng.sample(range(20, 40), len(oids))
    mapping = {o: Oid(0, n) for o, n in zip(oids, targets)}
    # isomorphisms fix global refs, so renaming their targets is a real change
    assume(not any(isinstance(v, GlobalRef) and v.oid in mapping
                   for _, h in g.items() for _, r in h.items() for _, v in r))
    g2 = rename_heap(g, mapping)
    assert brute_force_isomorphic(g, root, g2, mapping[root])
    assert path_isomorphic(g, root, g2, mapping[root])
    assert graph_isomorphic(g, root, g2, mapping[root]) is not None
