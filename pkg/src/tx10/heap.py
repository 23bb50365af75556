"""Place-local heaps, object graphs and the deterministic copy operation.

A global heap maps live places to local heaps; a local heap maps oids to
records; a record maps field names to values.  All three are immutable
and hashable.  Records are stored in lexicographic field order, which is
also the order every traversal in this module visits fields in.
"""
from __future__ import annotations

from typing import Iterable, Mapping, Optional

from .syntax import Oid


class DanglingOid(Exception):
    """A locally reachable oid is missing from its home heap (engine fault)."""

    def __init__(self, oid):
        super().__init__(f"dangling oid {oid}")
        self.oid = oid


class PlaceNotLive(Exception):
    def __init__(self, place):
        super().__init__(f"place {place} is not live")
        self.place = place


def record(fields: Mapping[str, object] = ()) -> tuple:
    return tuple(sorted(dict(fields).items()))


def record_get(r: tuple, f: str):
    for name, v in r:
        if name == f:
            return v
    raise KeyError(f)


def record_has(r: tuple, f: str) -> bool:
    return any(name == f for name, _ in r)


def record_set(r: tuple, f: str, v) -> tuple:
    return tuple(sorted({**dict(r), f: v}.items()))


class LocalHeap:
    __slots__ = ("_objs", "_hash")

    def __init__(self, objs: Mapping[Oid, tuple] = ()):
        self._objs = dict(sorted(dict(objs).items()))
        self._hash = None

    def __contains__(self, o):
        return o in self._objs

    def __getitem__(self, o) -> tuple:
        return self._objs[o]

    def __iter__(self):
        return iter(self._objs)

    def __len__(self):
        return len(self._objs)

    def items(self):
        return self._objs.items()

    def oids(self):
        return list(self._objs)

    def put(self, o: Oid, r: tuple) -> "LocalHeap":
        objs = dict(self._objs)
        objs[o] = r
        return LocalHeap(objs)

    def _key(self):
        return tuple(self._objs.items())

    def __eq__(self, other):
        return isinstance(other, LocalHeap) and self._objs == other._objs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"LocalHeap({self._objs!r})"


EMPTY_LOCAL = LocalHeap()


class GlobalHeap:
    """Partial map from places to local heaps; ``dom`` is the set of live places."""

    __slots__ = ("_heaps", "_hash")

    def __init__(self, heaps: Mapping[int, LocalHeap] = ()):
        self._heaps = dict(sorted(dict(heaps).items()))
        self._hash = None

    @classmethod
    def empty(cls, places: int) -> "GlobalHeap":
        return cls({p: EMPTY_LOCAL for p in range(places)})

    @property
    def dom(self) -> frozenset:
        return frozenset(self._heaps)

    def live(self, p: int) -> bool:
        return p in self._heaps

    def __getitem__(self, p) -> LocalHeap:
        return self._heaps[p]

    def items(self):
        return self._heaps.items()

    def with_local(self, p: int, h: LocalHeap) -> "GlobalHeap":
        heaps = dict(self._heaps)
        heaps[p] = h
        return GlobalHeap(heaps)

    def without(self, p: int) -> "GlobalHeap":
        heaps = dict(self._heaps)
        del heaps[p]
        return GlobalHeap(heaps)

    def lookup(self, o: Oid) -> tuple:
        """The record of ``o`` in its home heap."""
        h = self._heaps.get(o.place)
        if h is None or o not in h:
            raise DanglingOid(o)
        return h[o]

    def all_oids(self) -> list:
        return [o for _, h in self._heaps.items() for o in h]

    def __eq__(self, other):
        return isinstance(other, GlobalHeap) and self._heaps == other._heaps

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._heaps.items()))
        return self._hash

    def __repr__(self):
        return f"GlobalHeap({digest(self)})"


def make_heap(spec: Mapping[int, Mapping[Oid, Mapping[str, object]]]) -> GlobalHeap:
    """Build a global heap from plain nested dicts."""
    return GlobalHeap({p: LocalHeap({o: record(r) for o, r in objs.items()})
                       for p, objs in spec.items()})


# ---------------------------------------------------------------- digest

def show_value(v) -> str:
    return str(v)


def digest(g: GlobalHeap) -> str:
    """Canonical text rendering: places, oids by serial, fields lexicographic."""
    parts = []
    for p, h in g.items():
        objs = []
        for o, r in sorted(h.items(), key=lambda item: item[0].serial):
            fields = ",".join(f"{f}:{show_value(v)}" for f, v in r)
            objs.append(f"{o}{{{fields}}}")
        parts.append(f"{p}:[{' '.join(objs)}]")
    return " ".join(parts)


# ----------------------------------------------------------- allocation

def fresh_oids(h: LocalHeap, q: int, count: int) -> list:
    """The ``count`` least serials at place ``q`` not used in ``h``."""
    used = {o.serial for o in h if o.place == q}
    out, n = [], 0
    while len(out) < count:
        if n not in used:
            out.append(Oid(q, n))
        n += 1
    return out


# ---------------------------------------------------------- reachability

def reachable(g: GlobalHeap, root) -> set:
    """Values reachable from ``root``; global refs are leaves."""
    seen = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        if not isinstance(v, Oid):
            continue
        for _, w in g.lookup(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


def is_place_local(g: GlobalHeap):
    """``None`` when ``g`` is place-local, else a ``(place, oid, value)`` witness."""
    for q, h in g.items():
        for o, r in h.items():
            if o.place != q:
                return (q, o, o)
            for _, v in r:
                if isinstance(v, Oid) and (v.place != q or v not in h):
                    return (q, o, v)
    return None


# ---------------------------------------------------------- isomorphism

def graph_isomorphic(g1: GlobalHeap, r1, g2: GlobalHeap, r2) -> Optional[dict]:
    """Oid bijection between the rooted object graphs, fixing refs and exceptions.

    Rooted graphs with functional, field-labelled edges admit at most one
    isomorphism, so a parallel walk from the roots decides the question.
    """
    fwd, bwd = {}, {}

    def match(a, b) -> bool:
        if isinstance(a, Oid) != isinstance(b, Oid):
            return False
        if not isinstance(a, Oid):
            return a == b
        if a in fwd or b in bwd:
            return fwd.get(a) == b and bwd.get(b) == a
        fwd[a], bwd[b] = b, a
        ra, rb = g1.lookup(a), g2.lookup(b)
        if [f for f, _ in ra] != [f for f, _ in rb]:
            return False
        return all(match(va, vb) for (_, va), (_, vb) in zip(ra, rb))

    return dict(fwd) if match(r1, r2) else None


# ----------------------------------------------------------------- copy

def copy(v, q: int, g: GlobalHeap):
    """Copy the object graph rooted at ``v`` into place ``q``.

    Returns ``(v', g')``.  Non-oid values are returned unchanged.  Fresh
    oids are the least unused serials at ``q``, assigned in depth-first,
    field-order first-visit order.
    """
    if not g.live(q):
        raise PlaceNotLive(q)
    if not isinstance(v, Oid):
        return v, g
    reachable(g, v)  # raises DanglingOid before anything is allocated

    target = g[q]
    mapping: dict = {}
    records: dict = {}
    order = []

    def visit(o):
        [fresh] = fresh_oids(_Reserved(target, mapping.values()), q, 1)
        mapping[o] = fresh
        order.append(o)
        fields = []
        for f, w in g.lookup(o):
            if isinstance(w, Oid):
                if w not in mapping:
                    visit(w)
                fields.append((f, mapping[w]))
            else:
                fields.append((f, w))
        records[mapping[o]] = tuple(fields)

    visit(v)
    h = target
    for o in order:
        h = h.put(mapping[o], records[mapping[o]])
    return mapping[v], g.with_local(q, h)


class _Reserved:
    """View of a local heap plus oids reserved by an in-flight copy."""

    def __init__(self, h: LocalHeap, extra: Iterable[Oid]):
        self._oids = list(h) + list(extra)

    def __iter__(self):
        return iter(self._oids)


def copy_nodes(g: GlobalHeap, v) -> set:
    return {w for w in reachable(g, v) if isinstance(w, Oid)}
