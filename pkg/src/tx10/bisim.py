"""Bounded weak-bisimulation game with environment moves.

Each round normalizes the pair (unreachable objects are collected and
oids renamed jointly), applies every environment move of a finite
family, and then, at every eligible place, lets each strong step of one
side be answered by a weak step of the other that reaches the same heap.
A refutation is recorded as a witness tree that :func:`replay` checks
again from scratch.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .explore import Resilient, Semantics, TX10, oid_renaming, rename_heap, rename_stmt
from .heap import GlobalHeap, LocalHeap, fresh_oids, record, record_set
from .resilient import unlimited
from .step import OK, Done, Running
from .syntax import (Exc, GlobalRef, Oid, erase_labels, is_sync, placed_values, show,
                     stmt_values)


# ------------------------------------------------------- environment moves

@dataclass(frozen=True, order=True)
class EnvMove:
    kind: str  # identity | update | alloc | remove
    place: int = -1
    oid: Optional[Oid] = None
    field: str = ""
    value: object = None

    def apply(self, g: GlobalHeap) -> GlobalHeap:
        if self.kind == "identity":
            return g
        if self.kind == "update":
            h = g[self.place]
            return g.with_local(self.place, h.put(self.oid, record_set(h[self.oid], self.field,
                                                                       self.value)))
        if self.kind == "alloc":
            h = g[self.place]
            [o] = fresh_oids(h, self.place, 1)
            return g.with_local(self.place, h.put(o, record()))
        if self.kind == "remove":
            return g.without(self.place)
        raise ValueError(self.kind)

    def __str__(self):
        if self.kind == "identity":
            return "Identity"
        if self.kind == "update":
            return f"UpdateField({self.place},{self.oid}.{self.field}:={self.value})"
        if self.kind == "alloc":
            return f"AllocEmpty({self.place})"
        return f"RemovePlace({self.place})"


IDENTITY = EnvMove("identity")


def _global_refs(g: GlobalHeap, stmts) -> list:
    refs = set()
    for s in stmts:
        refs.update(v for v in stmt_values(s) if isinstance(v, GlobalRef))
    for _, h in g.items():
        for _, r in h.items():
            refs.update(v for _, v in r if isinstance(v, GlobalRef))
    return sorted(refs, key=lambda r: (r.oid.place, r.oid.serial))


def env_moves(g: GlobalHeap, stmts=(), resilient: bool = False) -> list:
    refs = _global_refs(g, stmts)
    moves = [IDENTITY]
    for p, h in g.items():
        universe = list(h.oids()) + refs + [Exc("E")]
        for o, r in h.items():
            for f, _ in r:
                moves.extend(EnvMove("update", p, o, f, v) for v in universe)
    moves.extend(EnvMove("alloc", p) for p in sorted(g.dom))
    if resilient:
        moves.extend(EnvMove("remove", p) for p in sorted(g.dom) if p != 0)
    return moves


def env_move_universe(k, resilient: bool = False) -> list:
    stmts = () if isinstance(k, Done) else (k.stmt,)
    return env_moves(k.heap, stmts, resilient)


# ----------------------------------------------------------- normalization

def _roots(stmts):
    for s in stmts:
        for v in stmt_values(s):
            if isinstance(v, Oid):
                yield v
            elif isinstance(v, GlobalRef):
                yield v.oid


def collect_garbage(g: GlobalHeap, stmts) -> GlobalHeap:
    """Drop objects not reachable from the statements (global refs are followed)."""
    keep = set()
    stack = list(_roots(stmts))
    while stack:
        o = stack.pop()
        if o in keep or not g.live(o.place) or o not in g[o.place]:
            continue
        keep.add(o)
        for _, v in g[o.place][o]:
            if isinstance(v, Oid):
                stack.append(v)
            elif isinstance(v, GlobalRef):
                stack.append(v.oid)
    return GlobalHeap({p: LocalHeap({o: r for o, r in h.items() if o in keep})
                       for p, h in g.items()})


def normalize(s1, s2, g: GlobalHeap):
    g = collect_garbage(g, (s1, s2))
    mapping = oid_renaming((s1, s2), g)
    return rename_stmt(s1, mapping), rename_stmt(s2, mapping), rename_heap(g, mapping)


def eligible_places(s1, s2, places: int) -> list:
    """Places where both statements are place-local when run there."""
    out = []
    for p in range(places):
        ok = all(v.place == q for s in (s1, s2) for q, v in placed_values(s, p)
                 if isinstance(v, Oid))
        if ok:
            out.append(p)
    return out


# ------------------------------------------------------------------ verdicts

@dataclass(frozen=True)
class Mismatch:
    reason: str
    left: str
    right: str

    def lines(self, indent=0) -> list:
        return [" " * indent + f"mismatch {self.reason}: {self.left} vs {self.right}"]


@dataclass(frozen=True)
class Challenge:
    """Side ``side`` makes a step no answer of the other side survives."""

    pair: tuple  # normalized (s1, s2, g) this round starts from
    move: EnvMove
    place: int
    side: int
    rule: str
    label: object
    target: object  # statement or None
    result: GlobalHeap
    responses: tuple = field(default=())  # (defender statement, sub-witness)

    def lines(self, indent=0) -> list:
        pad = " " * indent
        tgt = show(self.target) if self.target is not None else "<done>"
        who = "left" if self.side == 0 else "right"
        out = [pad + f"env {self.move}; {who} steps at {self.place} via {self.rule} "
                     f"label={self.label} to {tgt}"]
        if not self.responses:
            out.append(pad + "  no matching weak step on the other side")
        for stmt, sub in self.responses:
            out.append(pad + f"  answer {show(stmt)}:")
            out.extend(sub.lines(indent + 4))
        return out


@dataclass(frozen=True)
class BisimilarUpTo:
    depth: int
    distinguished = False

    def __str__(self):
        return f"BisimilarUpTo({self.depth})"


@dataclass(frozen=True)
class Distinguished:
    depth: int
    witness: object
    distinguished = True

    def __str__(self):
        return f"Distinguished({self.depth})"

    def lines(self) -> list:
        return [str(self)] + self.witness.lines(2)


# --------------------------------------------------------------------- game

class BisimGame:
    def __init__(self, resilient: bool = False, places: int = 3, env: bool = True,
                 max_closure: int = 20_000):
        self.resilient = resilient
        self.places = places
        self.env = env
        self.max_closure = max_closure
        self.sem = Resilient(unlimited(places)) if resilient else TX10
        self._true: dict = {}
        self._false: dict = {}
        self._strong: dict = {}
        self._closure: dict = {}
        self._weak: dict = {}
        self._norm: dict = {}

    # steps
    def strong(self, s, g, p) -> list:
        key = (s, g, p)
        if key not in self._strong:
            self._strong[key] = self.sem.step(s, g, p)
        return self._strong[key]

    def closure(self, k, p) -> tuple:
        """Configurations reachable by silent steps at ``p``, ``k`` included."""
        key = (k, p)
        if key in self._closure:
            return self._closure[key]
        seen, order, queue = {k}, [k], deque([k])
        while queue:
            c = queue.popleft()
            if isinstance(c, Done):
                continue
            for t in self.strong(c.stmt, c.heap, p):
                if t.label == OK:
                    c2 = t.target_config
                    if c2 not in seen:
                        if len(seen) >= self.max_closure:
                            raise RuntimeError("weak closure too large")
                        seen.add(c2)
                        order.append(c2)
                        queue.append(c2)
        self._closure[key] = tuple(order)
        return self._closure[key]

    def weak(self, k, p, label) -> tuple:
        if label == OK:
            return self.closure(k, p)
        key = (k, p, label)
        if key in self._weak:
            return self._weak[key]
        out, seen = [], set()
        for c in self.closure(k, p):
            if isinstance(c, Done):
                continue
            for t in self.strong(c.stmt, c.heap, p):
                if t.label == label:
                    for c2 in self.closure(t.target_config, p):
                        if c2 not in seen:
                            seen.add(c2)
                            out.append(c2)
        self._weak[key] = tuple(out)
        return self._weak[key]

    def moves(self, s1, s2, g) -> list:
        if not self.env:
            return [IDENTITY]
        return env_moves(g, (s1, s2), self.resilient)

    # the game
    def static(self, k1, k2) -> Optional[Mismatch]:
        d1, d2 = isinstance(k1, Done), isinstance(k2, Done)
        if d1 != d2:
            return Mismatch("termination", _cfg(k1), _cfg(k2))
        if k1.heap != k2.heap:
            return Mismatch("heap", repr(k1.heap), repr(k2.heap))
        if not d1 and is_sync(k1.stmt) != is_sync(k2.stmt):
            return Mismatch("isSync", show(k1.stmt), show(k2.stmt))
        return None

    def play(self, k1, k2, n: int):
        """``None`` when the pair survives ``n`` rounds, else a witness."""
        bad = self.static(k1, k2)
        if bad is not None or n == 0 or isinstance(k1, Done):
            return bad
        return self._round(k1.stmt, k2.stmt, k1.heap, n)

    def normalize(self, s1, s2, g):
        key = (s1, s2, g)
        out = self._norm.get(key)
        if out is None:
            out = self._norm[key] = normalize(s1, s2, g)
        return out

    def _round(self, s1, s2, g, n):
        s1, s2, g = self.normalize(s1, s2, g)
        if s1 == s2:
            return None
        key = (s1, s2, g)
        if self._true.get(key, -1) >= n:
            return None
        known = self._false.get(key)
        if known is not None and known[0] <= n:
            return known[1]
        w = self._search(s1, s2, g, n)
        if w is None:
            self._true[key] = max(n, self._true.get(key, -1))
        else:
            self._false[key] = (n, w)
        return w

    def _search(self, s1, s2, g, n):
        places = eligible_places(s1, s2, self.places)
        tried = set()
        for move in self.moves(s1, s2, g):
            g1 = move.apply(g)
            if g1 in tried:
                continue
            tried.add(g1)
            for p in places:
                for side in (0, 1):
                    chal, other = (s1, s2) if side == 0 else (s2, s1)
                    for t in self.strong(chal, g1, p):
                        w = self._answer(t, other, g1, p, side, n)
                        if w is not None:
                            return Challenge((s1, s2, g), move, p, side, t.rule_chain,
                                             t.label, t.target, t.result, w)
        return None

    def _answer(self, t, other, g1, p, side, n):
        """``None`` if some weak answer survives, else the failed answers."""
        failed = []
        for c in self.weak(Running(other, g1), p, t.label):
            if c.heap != t.result:
                continue
            if t.target is None:
                if isinstance(c, Done):
                    return None
                continue
            if isinstance(c, Done):
                continue
            k_t = Running(t.target, t.result)
            pair = (k_t, c) if side == 0 else (c, k_t)
            sub = self.play(pair[0], pair[1], n - 1)
            if sub is None:
                return None
            failed.append((c.stmt, sub))
        return tuple(failed)


def _cfg(k) -> str:
    return "<done>" if isinstance(k, Done) else show(k.stmt)


def _erase(k):
    return k if isinstance(k, Done) else Running(erase_labels(k.stmt), k.heap)


def weak_bisim(k1, k2, sem: Semantics = TX10, depth: int = 8, places: int = 3,
               env: bool = True, game: BisimGame = None):
    """The least refuting depth with its witness, else ``BisimilarUpTo(depth)``."""
    game = game or BisimGame(sem.resilient, places, env)
    k1, k2 = _erase(k1), _erase(k2)
    if game.play(k1, k2, depth) is None:
        return BisimilarUpTo(depth)
    for n in range(depth + 1):
        w = game.play(k1, k2, n)
        if w is not None:
            return Distinguished(n, w)
    return BisimilarUpTo(depth)


# ------------------------------------------------------------------- replay

def replay(k1, k2, witness, game: BisimGame) -> bool:
    """Re-check a witness with fresh caches: True when it still refutes the pair."""
    fresh = BisimGame(game.resilient, game.places, game.env, game.max_closure)
    return _replay(fresh, _erase(k1), _erase(k2), witness)


def _replay(game, k1, k2, w) -> bool:
    bad = game.static(k1, k2)
    if isinstance(w, Mismatch):
        return bad is not None and bad.reason == w.reason
    if bad is not None or isinstance(k1, Done):
        return False
    s1, s2, g = normalize(k1.stmt, k2.stmt, k1.heap)
    if (s1, s2, g) != w.pair or w.move not in game.moves(s1, s2, g):
        return False
    if w.place not in eligible_places(s1, s2, game.places):
        return False
    g1 = w.move.apply(g)
    chal, other = (s1, s2) if w.side == 0 else (s2, s1)
    if not any(t.label == w.label and t.target == w.target and t.result == w.result
               for t in game.strong(chal, g1, w.place)):
        return False
    subs = dict(w.responses)
    for c in game.weak(Running(other, g1), w.place, w.label):
        if c.heap != w.result:
            continue
        if w.target is None:
            if isinstance(c, Done):
                return False
            continue
        if isinstance(c, Done):
            continue
        sub = subs.get(c.stmt)
        if sub is None:
            return False
        k_t = Running(w.target, w.result)
        pair = (k_t, c) if w.side == 0 else (c, k_t)
        if not _replay(game, pair[0], pair[1], sub):
            return False
    return True
