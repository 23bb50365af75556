"""Seeded random generators: programs, runtime statements and object graphs.

Everything takes a ``random.Random`` so corpora are reproducible from a seed.
"""
from __future__ import annotations

import random

from .heap import GlobalHeap, LocalHeap, record
from .parser import parse_program
from .syntax import (EXCEPTIONS, At, AtSimple, Async, DynAt, Exc, FieldAssign,
                     Finish, GlobalRef, GlobalRefOf, ObjLit, Oid, Select, Seq,
                     Skip, Spawned, Throw, TryCatch, ValDecl, Var, show)

FIELDS = ("f", "g")


def _expr(rng, scope):
    """A small closed expression over the variables in ``scope``."""
    choices = ["exc", "obj"]
    if scope:
        choices += ["var", "var", "select", "gref"]
    kind = rng.choice(choices)
    if kind == "exc":
        return Exc(rng.choice(("E", "BF")))
    if kind == "obj":
        return ObjLit(((rng.choice(FIELDS), Exc("E")),))
    x = Var(rng.choice(scope))
    if kind == "var":
        return x
    if kind == "select":
        return Select(x, rng.choice(FIELDS))
    return GlobalRefOf(x)


def random_stmt(rng: random.Random, budget: int, places: int = 3, scope=(),
                dynamic: bool = False, _names=None):
    """A statement with at most ``budget`` statement nodes.

    With ``dynamic`` the runtime forms (spawned, dynat, finish with a
    non-empty exception set) may appear too; such terms are not programs.
    """
    names = _names if _names is not None else iter(f"x{i}" for i in range(1000))
    if budget <= 1:
        leaves = ["skip", "throw"] + (["assign"] if scope else [])
        kind = rng.choice(leaves)
        if kind == "skip":
            return Skip()
        if kind == "throw":
            return Throw(Exc(rng.choice(EXCEPTIONS[:2])))
        return FieldAssign(Var(rng.choice(scope)), rng.choice(FIELDS), _expr(rng, scope))

    unary = ["async", "finish", "at", "atval", "val"]
    if dynamic:
        unary += ["spawned", "dynat", "finish-mu"]
    binary = ["seq", "seq", "try"]
    kind = rng.choice(unary + binary + ["leaf"])
    if kind == "leaf":
        return random_stmt(rng, 1, places, scope, dynamic, names)
    if kind in binary:
        if budget < 3:
            return random_stmt(rng, 1, places, scope, dynamic, names)
        left = rng.randint(1, budget - 2)
        a = random_stmt(rng, left, places, scope, dynamic, names)
        b = random_stmt(rng, budget - 1 - left, places, scope, dynamic, names)
        return Seq(a, b) if kind == "seq" else TryCatch(a, b)

    inner_scope = scope
    if kind in ("atval", "val"):
        x = next(names)
        e = _expr(rng, scope)
        # at-bodies may only mention the captured variable
        inner_scope = (x,) if kind == "atval" else scope + (x,)
    elif kind == "at":
        inner_scope = ()
    body = random_stmt(rng, budget - 1, places, inner_scope, dynamic, names)
    p = rng.randrange(places)
    if kind == "async":
        return Async(body)
    if kind == "finish":
        return Finish(frozenset(), body)
    if kind == "finish-mu":
        return Finish(frozenset({rng.choice(EXCEPTIONS)}), body)
    if kind == "at":
        return AtSimple(p, body)
    if kind == "atval":
        return At(p, x, e, body)
    if kind == "val":
        return ValDecl(x, e, body)
    if kind == "spawned":
        return Spawned(body)
    return DynAt(p, body)


def random_program(rng: random.Random, max_nodes: int = 8, places: int = 3):
    """A labelled static program, produced through the parser."""
    s = random_stmt(rng, rng.randint(1, max_nodes), places)
    return parse_program(show(s))


def program_corpus(n: int, seed: int = 0, max_nodes: int = 8, places: int = 3) -> list:
    """``n`` distinct programs, in generation order."""
    rng = random.Random(seed)
    seen, out = set(), []
    while len(out) < n:
        p = random_program(rng, max_nodes, places)
        key = show(p)
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def random_object_graph(rng: random.Random, max_nodes: int = 8, places: int = 3):
    """A place-local global heap and a root oid at place 0.

    Place-0 objects point at each other (cycles allowed) and at global
    references to objects living at other places.
    """
    n = rng.randint(1, max_nodes)
    serials = rng.sample(range(2 * max_nodes), n)
    local = [Oid(0, s) for s in serials]
    remote = [Oid(q, i) for q in range(1, places) for i in range(rng.randint(0, 2))]
    heaps = {q: {} for q in range(places)}
    for o in remote:
        heaps[o.place][o] = record({"f": Exc("E")})
    for o in local:
        fields = {}
        for f in rng.sample(FIELDS + ("h",), rng.randint(0, 3)):
            pick = rng.random()
            if pick < 0.5:
                fields[f] = rng.choice(local)
            elif pick < 0.7 and remote:
                fields[f] = GlobalRef(rng.choice(remote))
            elif pick < 0.8:
                fields[f] = GlobalRef(rng.choice(local))
            else:
                fields[f] = Exc(rng.choice(EXCEPTIONS))
        heaps[0][o] = record(fields)
    g = GlobalHeap({q: LocalHeap(h) for q, h in heaps.items()})
    return g, rng.choice(local)
