"""Equational laws, their instantiation corpus, and the law-suite report.

Laws are numbered (1)-(34) for the failure-free
calculus and (35)-(52) for the resilient one.  Each law ranges its
metavariables over small fixed pools; ``s``, ``t``, ``u`` are statements,
``v`` an exception and ``p``, ``q`` places.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from .bisim import BisimGame, eligible_places, replay, weak_bisim
from .explore import TX10, Resilient
from .heap import make_heap
from .parser import parse_program
from .resilient import unlimited
from .step import Running
from .syntax import (AtSimple, Async, DynAt, Exc, Finish, Oid, Seq, Skip, Spawned,
                     Throw, TryCatch, erase_labels, is_local, is_sync, no_async,
                     show)

PLACES = 3


def initial_heap():
    """Three places; place 0 holds one shared object with one field."""
    return make_heap({0: {Oid(0, 0): {"f": Exc("E")}}, 1: {}, 2: {}})


def _p(text):
    return erase_labels(parse_program(text, allow_dynamic=True))


STATIC_POOL = {
    "skip": _p("skip;"),
    "throw": _p("throw E;"),
    "throw-bf": _p("throw BF;"),
    "alloc": _p("val x = {f: E} in { x.f = BF; }"),
    "update": _p("o(0,0).f = BF;"),
    "async-skip": _p("async { skip; }"),
    "async-throw": _p("async { throw E; }"),
    "at-skip": _p("at (1) { skip; }"),
}

ASYNC_POOL = {
    "spawned-skip": _p("spawned { skip; }"),
    "spawned-throw": _p("spawned { throw E; }"),
    "spawned-update": _p("spawned { o(0,0).f = BF; }"),
    "remote-spawned": _p("dynat (1) { spawned { skip; } }"),
}

PLACE_POOL = (0, 1, 2)


# ----------------------------------------------------------- constructors

def seq(a, b):
    return Seq(a, b)


def at(p, s):
    return AtSimple(p, s)


def dyn(p, s):
    return DynAt(p, s)


def fin(s):
    return Finish(frozenset(), s)


def try_(s, t):
    return TryCatch(s, t)


def throw(v):
    return Throw(Exc(v))


SKIP = Skip()


# ----------------------------------------------------------------- laws

@dataclass(frozen=True)
class Law:
    number: int
    calculus: str  # "tx10" | "resilient"
    equiv: bool
    text: str
    build: Callable
    domains: dict
    side: str = "-"
    cond: Optional[Callable] = None
    variant: str = ""

    @property
    def name(self):
        return f"({self.number}){self.variant}"

    def instances(self):
        names = sorted(self.domains)
        for combo in itertools.product(*(self.domains[n] for n in names)):
            env = dict(zip(names, combo))
            if self.cond is not None and not self.cond(env):
                continue
            yield env, self.build(**_values(env))


def _values(env):
    out = {}
    for k, v in env.items():
        if k in "stu":
            out[k] = STATIC_POOL.get(v) or ASYNC_POOL[v]
        else:
            out[k] = v
    return out


S = tuple(STATIC_POOL)
A = tuple(ASYNC_POOL)
P = PLACE_POOL
V_EQ = V_NEQ = ("E", "BF")


def _sync(name):
    return is_sync((STATIC_POOL.get(name) or ASYNC_POOL[name]))


def _stmt(name):
    return STATIC_POOL.get(name) or ASYNC_POOL[name]


def _law(number, calculus, equiv, text, build, side="-", cond=None, variant="", **domains):
    return Law(number, calculus, equiv, text, build, domains, side, cond, variant)


def _noasync_local(env):
    s = _stmt(env["s"])
    return no_async(s) and is_local(s)


TX10_LAWS = [
    _law(1, "tx10", True, "{skip; s} == s", lambda s: (seq(SKIP, s), s),
         "isSync s", lambda e: _sync(e["s"]), s=S),
    _law(2, "tx10", True, "{s skip;} == s", lambda s: (seq(s, SKIP), s),
         "isSync s", lambda e: _sync(e["s"]), s=S),
    _law(3, "tx10", True, "{throw v s} == throw v", lambda s, v: (seq(throw(v), s), throw(v)),
         s=S, v=V_EQ),
    _law(4, "tx10", True, "{{s t} u} == {s {t u}}",
         lambda s, t, u: (seq(seq(s, t), u), seq(s, seq(t, u))), s=S, t=S, u=S),
    _law(5, "tx10", True, "try skip catch t == skip", lambda t: (try_(SKIP, t), SKIP), t=S),
    _law(6, "tx10", True, "try throw v catch s == s", lambda s, v: (try_(throw(v), s), s),
         "isSync s", lambda e: _sync(e["s"]), s=S, v=V_EQ),
    _law(7, "tx10", True, "try s catch throw v == s", lambda s, v: (try_(s, throw(v)), s),
         s=S, v=V_EQ),
    _law(8, "tx10", False, "try {s t} catch u != {try s catch u  try t catch u}",
         lambda s, t, u: (try_(seq(s, t), u), seq(try_(s, u), try_(t, u))), s=S, t=S, u=S),
    _law(9, "tx10", True, "try {s t} catch u == {try s catch u  try t catch u}",
         lambda s, t, u: (try_(seq(s, t), u), seq(try_(s, u), try_(t, u))),
         "isAsync {s t}", s=A, t=A, u=S),
    _law(10, "tx10", True, "try (try s catch t) catch u == try s catch (try t catch u)",
         lambda s, t, u: (try_(try_(s, t), u), try_(s, try_(t, u))), s=S, t=S, u=S),
    _law(11, "tx10", True, "at(p) skip == skip", lambda p: (at(p, SKIP), SKIP), p=P),
    _law(12, "tx10", True, "at(p) throw v == throw v", lambda p, v: (at(p, throw(v)), throw(v)),
         p=P, v=V_EQ),
    _law(13, "tx10", True, "at(p) {s t} == {at(p) s  at(p) t}",
         lambda p, s, t: (at(p, seq(s, t)), seq(at(p, s), at(p, t))), p=P, s=S, t=S),
    _law(14, "tx10", True, "at(p) try s catch t == try at(p) s catch at(p) t",
         lambda p, s, t: (at(p, try_(s, t)), try_(at(p, s), at(p, t))), p=P, s=S, t=S),
    _law(15, "tx10", True, "at(p) at(q) s == at(q) s",
         lambda p, q, s: (at(p, at(q, s)), at(q, s)), p=P, q=P, s=S),
    _law(16, "tx10", False, "spawned skip != skip",
         lambda: (Spawned(SKIP), SKIP), variant="a"),
    _law(16, "tx10", False, "spawned throw v != throw v",
         lambda v: (Spawned(throw(v)), throw(v)), variant="b", v=V_NEQ),
    _law(17, "tx10", False, "{spawned throw v  spawned throw v} != spawned throw v",
         lambda v: (seq(Spawned(throw(v)), Spawned(throw(v))), Spawned(throw(v))), v=V_NEQ),
    _law(18, "tx10", True, "{spawned throw v  s} == {s  spawned throw v}",
         lambda s, v: (seq(Spawned(throw(v)), s), seq(s, Spawned(throw(v)))),
         "isAsync s", s=A, v=V_EQ),
    _law(19, "tx10", True, "async at(p) s == at(p) async s",
         lambda p, s: (Async(at(p, s)), at(p, Async(s))), p=P, s=S),
    _law(19, "tx10", True, "spawned dynat(p) s == dynat(p) spawned s",
         lambda p, s: (Spawned(dyn(p, s)), dyn(p, Spawned(s))), variant="d", p=P, s=S),
    _law(20, "tx10", True, "async async s == async s",
         lambda s: (Async(Async(s)), Async(s)), s=S),
    _law(20, "tx10", True, "spawned spawned s == spawned s",
         lambda s: (Spawned(Spawned(s)), Spawned(s)), variant="d", s=S),
    _law(21, "tx10", True, "{s t} == {t s}", lambda s, t: (seq(s, t), seq(t, s)),
         "isAsync s, isAsync t", s=A, t=A),
    _law(22, "tx10", True, "try {s t} catch u == {s  try t catch u}",
         lambda s, t, u: (try_(seq(s, t), u), seq(s, try_(t, u))), "isAsync s",
         s=A, t=S, u=S),
    _law(23, "tx10", True, "finish skip == skip", lambda: (fin(SKIP), SKIP)),
    _law(24, "tx10", False, "finish throw v != throw v", lambda v: (fin(throw(v)), throw(v)),
         v=V_NEQ),
    _law(25, "tx10", True, "finish {s t} == finish {s  finish t}",
         lambda s, t: (fin(seq(s, t)), fin(seq(s, fin(t)))), s=S, t=S),
    _law(26, "tx10", False, "finish {s  throw v} != {finish s  throw v}",
         lambda s, v: (fin(seq(s, throw(v))), seq(fin(s), throw(v))), s=S, v=V_NEQ),
    _law(27, "tx10", True, "finish async s == finish s",
         lambda s: (fin(Async(s)), fin(s)), s=S),
    _law(28, "tx10", True, "finish {s  async t} == finish {s t}",
         lambda s, t: (fin(seq(s, Async(t))), fin(seq(s, t))), s=S, t=S),
    _law(29, "tx10", True, "finish at(p) s == at(p) finish s",
         lambda p, s: (fin(at(p, s)), at(p, fin(s))), p=P, s=S),
    _law(30, "tx10", True, "finish {async throw v  s} == {finish s  throw v}",
         lambda s, v: (fin(seq(Async(throw(v)), s)), seq(fin(s), throw(v))), s=S, v=V_EQ),
    _law(31, "tx10", True, "finish finish s == finish s",
         lambda s: (fin(fin(s)), fin(s)), s=S),
    _law(32, "tx10", False, "finish s != s", lambda s: (fin(s), s), "noAsync s",
         lambda e: no_async(_stmt(e["s"])), s=S),
    _law(33, "tx10", False, "finish {s t} != {s  finish t}",
         lambda s, t: (fin(seq(s, t)), seq(s, fin(t))), "noAsync s",
         lambda e: no_async(_stmt(e["s"])), s=S, t=S),
    _law(34, "tx10", False, "finish try s catch t != try s catch finish t",
         lambda s, t: (fin(try_(s, t)), try_(s, fin(t))), "noAsync s",
         lambda e: no_async(_stmt(e["s"])), s=S, t=S),
]

RESILIENT_LAWS = [
    _law(35, "resilient", True, "{skip; s} == s", lambda s: (seq(SKIP, s), s),
         "noAsync s, isLocal s", _noasync_local, s=S),
    _law(36, "resilient", False, "{s skip;} != s", lambda s: (seq(s, SKIP), s),
         "isSync s", lambda e: _sync(e["s"]), s=S),
    _law(37, "resilient", True, "{throw v s} == throw v",
         lambda s, v: (seq(throw(v), s), throw(v)), s=S, v=V_EQ),
    _law(38, "resilient", True, "{{s t} u} == {s {t u}}",
         lambda s, t, u: (seq(seq(s, t), u), seq(s, seq(t, u))), s=S, t=S, u=S),
    _law(39, "resilient", True, "try throw v catch s == s",
         lambda s, v: (try_(throw(v), s), s), "noAsync s, isLocal s", _noasync_local,
         s=S, v=V_EQ),
    _law(40, "resilient", False, "at(p) skip != skip", lambda p: (at(p, SKIP), SKIP),
         variant="a", p=P),
    _law(40, "resilient", False, "dynat(p) skip != skip", lambda p: (dyn(p, SKIP), SKIP),
         variant="b", p=P),
    _law(41, "resilient", True, "at(p) throw v == throw v",
         lambda p, v: (at(p, throw(v)), throw(v)), variant="a", p=P, v=V_EQ),
    _law(41, "resilient", True, "dynat(p) throw v == throw v",
         lambda p, v: (dyn(p, throw(v)), throw(v)), variant="b", p=P, v=V_EQ),
    _law(42, "resilient", False, "at(p) {s t} != {at(p) s  at(p) t}",
         lambda p, s, t: (at(p, seq(s, t)), seq(at(p, s), at(p, t))), p=P, s=S, t=S),
    _law(43, "resilient", True, "dynat(p) {s t} == {dynat(p) s  dynat(p) t}",
         lambda p, s, t: (dyn(p, seq(s, t)), seq(dyn(p, s), dyn(p, t))), p=P, s=S, t=S),
    _law(44, "resilient", False, "at(p) try s catch t != try at(p) s catch at(p) t",
         lambda p, s, t: (at(p, try_(s, t)), try_(at(p, s), at(p, t))), p=P, s=S, t=S),
    _law(45, "resilient", False, "at(p) at(q) s != at(q) s",
         lambda p, q, s: (at(p, at(q, s)), at(q, s)), variant="a", p=P, q=P, s=S),
    _law(45, "resilient", False, "dynat(p) dynat(q) s != dynat(q) s",
         lambda p, q, s: (dyn(p, dyn(q, s)), dyn(q, s)), variant="b", p=P, q=P, s=S),
    _law(46, "resilient", True, "{spawned throw v  s} == {s  spawned throw v}",
         lambda s, v: (seq(Spawned(throw(v)), s), seq(s, Spawned(throw(v)))),
         "isAsync s", s=A, v=V_EQ),
    _law(47, "resilient", False, "async at(p) s != at(p) async s",
         lambda p, s: (Async(at(p, s)), at(p, Async(s))), p=P, s=S),
    _law(48, "resilient", False, "spawned dynat(p) s != dynat(p) spawned s",
         lambda p, s: (Spawned(dyn(p, s)), dyn(p, Spawned(s))), p=P, s=S),
    _law(49, "resilient", True, "async async s == async s",
         lambda s: (Async(Async(s)), Async(s)), s=S),
    _law(50, "resilient", True, "{s t} == {t s}", lambda s, t: (seq(s, t), seq(t, s)),
         "isAsync s, isAsync t", s=A, t=A),
    _law(51, "resilient", True, "try {s t} catch u == {s  try t catch u}",
         lambda s, t, u: (try_(seq(s, t), u), seq(s, try_(t, u))), "isAsync s",
         s=A, t=S, u=S),
    _law(52, "resilient", False, "finish at(p) s != at(p) finish s",
         lambda p, s: (fin(at(p, s)), at(p, fin(s))), p=P, s=S),
]

ALL_LAWS = TX10_LAWS + RESILIENT_LAWS


def laws_for(calculus: str) -> list:
    return [law for law in ALL_LAWS if law.calculus == calculus]


# --------------------------------------------------------------- checking

def well_formed(lhs, rhs) -> bool:
    """Both sides place-local when run from place 0."""
    return 0 in eligible_places(lhs, rhs, PLACES)


@dataclass
class InstanceResult:
    env: dict
    lhs: object
    rhs: object
    verdict: object
    replayed: Optional[bool] = None


@dataclass
class LawResult:
    law: Law
    depth: int
    instances: list = field(default_factory=list)

    @property
    def refuted(self) -> list:
        return [r for r in self.instances if r.verdict.distinguished]

    @property
    def verdict(self) -> str:
        return "refuted" if self.refuted else "verified"

    @property
    def ok(self) -> bool:
        if self.law.equiv:
            return not self.refuted
        return bool(self.refuted) and all(r.replayed for r in self.refuted)

    def witness_instance(self) -> Optional[InstanceResult]:
        return self.refuted[0] if self.refuted else None

    def line(self) -> str:
        expected = "==" if self.law.equiv else "!="
        w = self.witness_instance()
        where = ""
        if w is not None:
            where = f" | witness={_env_text(w.env)} {show(w.lhs)} vs {show(w.rhs)}"
        status = "ok" if self.ok else "MISMATCH"
        return (f"law={self.law.name} | calculus={self.law.calculus} | side={self.law.side} "
                f"| expected={expected} | verdict={self.verdict} | refuted="
                f"{len(self.refuted)}/{len(self.instances)} | depth={self.depth} "
                f"| status={status}{where}")


def _env_text(env) -> str:
    return ",".join(f"{k}={v}" for k, v in sorted(env.items()))


def check_law(law: Law, depth: int = 8, game: BisimGame = None) -> LawResult:
    resilient = law.calculus == "resilient"
    game = game or BisimGame(resilient, PLACES)
    sem = Resilient(unlimited(PLACES)) if resilient else TX10
    g = initial_heap()
    out = LawResult(law, depth)
    for env, (lhs, rhs) in law.instances():
        if not well_formed(lhs, rhs):
            continue
        k1, k2 = Running(lhs, g), Running(rhs, g)
        v = weak_bisim(k1, k2, sem, depth, PLACES, game=game)
        rep = replay(k1, k2, v.witness, game) if v.distinguished else None
        out.instances.append(InstanceResult(env, lhs, rhs, v, rep))
    return out


def law_suite(calculus: str = "tx10", depth: int = 8, numbers=None) -> list:
    game = BisimGame(calculus == "resilient", PLACES)
    return [check_law(law, depth, game) for law in laws_for(calculus)
            if numbers is None or law.number in numbers]


def report_lines(results, calculus: str, depth: int) -> list:
    head = (f"# law suite calculus={calculus} depth={depth} places={PLACES} "
            f"env-moves=finite-family env-applied=once-per-round "
            f"verified=no-counterexample-within-bound")
    return [head] + [r.line() for r in results]


# ------------------------------------------------------------ congruence

CONTEXTS = {
    "seq-left": lambda x: Seq(x, Skip()),
    "seq-right-async": lambda x: Seq(Spawned(Skip()), x),
    "finish": lambda x: Finish(frozenset(), x),
    "try-left": lambda x: TryCatch(x, Skip()),
    "dynat": lambda x: DynAt(1, x),
}


def congruence_sample(results, n: int = 50, seed: int = 0, depth: int = 8):
    """Wrap verified pairs in contexts and re-check; returns (context, instance, verdict)."""
    rng = random.Random(seed)
    pairs = [(res.law, r) for res in results for r in res.instances
             if not r.verdict.distinguished]
    combos = [(law, r, c) for law, r in pairs for c in sorted(CONTEXTS)
              if well_formed(CONTEXTS[c](r.lhs), CONTEXTS[c](r.rhs))]
    rng.shuffle(combos)
    games = {}
    out = []
    g = initial_heap()
    for law, r, c in combos[:n]:
        resilient = law.calculus == "resilient"
        game = games.setdefault(resilient, BisimGame(resilient, PLACES))
        sem = Resilient(unlimited(PLACES)) if resilient else TX10
        lhs, rhs = CONTEXTS[c](r.lhs), CONTEXTS[c](r.rhs)
        v = weak_bisim(Running(lhs, g), Running(rhs, g), sem, depth, PLACES, game=game)
        out.append((law, c, r, v))
    return out
