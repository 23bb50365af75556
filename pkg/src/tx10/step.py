"""The labelled transition relation on configurations.

``transitions(s, g, p, resilient)`` enumerates every one-step derivation
of ``<s, g>`` at place ``p``.  With ``resilient=False`` it is the
failure-free calculus; with ``resilient=True`` the rules for failed
places (dead-place exceptions, masking on return, failed sequencing) are
enabled.  Place failure itself is injected by :mod:`tx10.resilient`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional

from .expr import ALREADY_VALUE, Thrown, eval_step
from .heap import GlobalHeap, copy, digest, record_has, record_set
from .syntax import (WRAPPER_LABEL, At, AtSimple, Async, DynAt, FieldAssign,
                     Finish, Oid, Seq, Skip, Spawned, Throw, TryCatch,
                     ValDecl, is_async, is_sync, is_value, show, substitute)


# ---------------------------------------------------------------- labels

@dataclass(frozen=True, order=True)
class Label:
    kind: str  # "ok" | "async" | "sync"
    exc: Optional[str] = None

    def __str__(self):
        if self.kind == "ok":
            return "ok"
        return f"{self.exc}{'x' if self.kind == 'async' else '!'}"


OK = Label("ok")


def AsyncExc(e) -> Label:
    return Label("async", str(e))


def SyncExc(e) -> Label:
    return Label("sync", str(e))


def mask_async(lab: Label) -> Label:
    return OK if lab.kind == "ok" else AsyncExc(lab.exc)


def merge_exceptions(mu: frozenset, lab: Label) -> frozenset:
    return mu if lab.kind == "ok" else mu | {lab.exc}


# -------------------------------------------------------- configurations

@dataclass(frozen=True)
class Running:
    stmt: object
    heap: GlobalHeap


@dataclass(frozen=True)
class Done:
    heap: GlobalHeap


def config(stmt, heap):
    return Done(heap) if stmt is None else Running(stmt, heap)


@dataclass(frozen=True)
class Transition:
    """One derivation: the conclusion plus the premise it was built from."""

    rule: str
    place: int
    label: Label
    source: object
    heap: GlobalHeap
    target: object  # statement, or None when the configuration terminates
    result: GlobalHeap
    premise: Optional["Transition"] = field(default=None, compare=False)
    injected: bool = False

    @property
    def target_config(self):
        return config(self.target, self.result)

    @property
    def chain(self) -> list:
        out, t = [], self
        while t is not None:
            out.append(t)
            t = t.premise
        return out

    @property
    def rule_chain(self) -> str:
        return "/".join(t.rule for t in self.chain)

    def nodes(self):
        return self.chain


def _lift(rule, p, label, s, g, d, target, injected=False):
    return Transition(rule, p, label, s, g, target, d.result, d, injected)


# ------------------------------------------------------------ the rules

def transitions(s, g: GlobalHeap, p: int, resilient: bool = False) -> list:
    live = g.live(p)
    out = []

    if isinstance(s, Skip):
        if live:
            out.append(Transition("Skip", p, OK, s, g, None, g))
        elif resilient:
            out.append(Transition("Local Failure", p, SyncExc("DP"), s, g, None, g))
        return out

    if isinstance(s, Throw):
        if live:
            out.append(Transition("Exception", p, SyncExc(s.value), s, g, None, g))
        elif resilient:
            out.append(Transition("Local Failure", p, SyncExc("DP"), s, g, None, g))
        return out

    if isinstance(s, ValDecl):
        if not live:
            if resilient:
                out.append(Transition("Local Failure", p, SyncExc("DP"), s, g, None, g))
            return out
        if is_value(s.expr):
            body = substitute(s.body, s.var, s.expr)
            for d in transitions(body, g, p, resilient):
                out.append(_lift("Declare Val", p, d.label, s, g, d, d.target))
            return out
        return [_expr_ctx(s, "expr", g, p)]

    if isinstance(s, FieldAssign):
        if not live:
            if resilient:
                out.append(Transition("Local Failure", p, SyncExc("DP"), s, g, None, g))
            return out
        if not is_value(s.target):
            return [_expr_ctx(s, "target", g, p)]
        o = s.target
        if not isinstance(o, Oid):
            return [Transition("Bad Field Update", p, SyncExc("BF"), s, g, None, g)]
        if not is_value(s.value):
            return [_expr_ctx(s, "value", g, p)]
        h = g[p]
        if o in h and record_has(h[o], s.field):
            g2 = g.with_local(p, h.put(o, record_set(h[o], s.field, s.value)))
            return [Transition("Field Update", p, OK, s, g, None, g2)]
        return [Transition("Bad Field Update", p, SyncExc("BF"), s, g, None, g)]

    if isinstance(s, Async):
        if live:
            out.append(Transition("Spawn", p, OK, s, g, Spawned(s.body, s.label), g))
        elif resilient:
            out.append(Transition("Spawn", p, SyncExc("DP"), s, g, None, g))
        return out

    if isinstance(s, Spawned):
        for d in transitions(s.body, g, p, resilient):
            target = None if d.target is None else Spawned(d.target, s.label)
            out.append(_lift("Async", p, mask_async(d.label), s, g, d, target))
        return out

    if isinstance(s, Finish):
        for d in transitions(s.body, g, p, resilient):
            if d.target is not None:
                target = Finish(merge_exceptions(s.mu, d.label), d.target, s.label)
                out.append(_lift("Finish", p, OK, s, g, d, target))
            else:
                lab = end_of_finish_label(s.mu, d.label, live or not resilient)
                out.append(_lift("End of Finish", p, lab, s, g, d, None))
        return out

    if isinstance(s, Seq):
        for d in transitions(s.first, g, p, resilient):
            lab = d.label
            if d.target is not None:
                if lab.kind == "sync":
                    out.append(_lift("Seq", p, lab, s, g, d, d.target))
                else:
                    out.append(_lift("Seq", p, lab, s, g, d,
                                     Seq(d.target, s.second, s.label)))
            elif not resilient or live:
                rule = "Seq Term" if resilient else "Seq"
                if lab.kind == "sync":
                    out.append(_lift(rule, p, lab, s, g, d, None))
                else:
                    out.append(_lift(rule, p, lab, s, g, d, s.second))
            else:
                if is_sync(s.first):
                    out.append(_lift("Seq Failed Term", p, SyncExc("DP"), s, g, d, None))
                else:
                    out.append(_lift("Seq Failed Term", p, AsyncExc("DP"), s, g, d,
                                     s.second))
        if is_async(s.first):
            for d in transitions(s.second, g, p, resilient):
                target = s.first if d.target is None else Seq(s.first, d.target, s.label)
                out.append(_lift("Par", p, d.label, s, g, d, target))
        return out

    if isinstance(s, (At, AtSimple)):
        if resilient and not live:
            return [Transition("Place Shift", p, SyncExc("DP"), s, g, None, g)]
        if resilient and not g.live(s.place):
            out.append(Transition("Place Shift", p, SyncExc("DP"), s, g, None, g))
        if not live:
            return out
        if isinstance(s, AtSimple):
            body = Seq(s.body, Skip(s.label), s.label)
            if g.live(s.place):
                out.append(Transition("Place Shift", p, OK, s, g,
                                      DynAt(s.place, body, s.label), g))
            return out
        if not is_value(s.expr):
            out.append(_expr_ctx(s, "expr", g, p))
            return out
        if g.live(s.place):
            v2, g2 = copy(s.expr, s.place, g)
            body = Seq(substitute(s.body, s.var, v2), Skip(s.label), s.label)
            out.append(Transition("Place Shift", p, OK, s, g,
                                  DynAt(s.place, body, s.label), g2))
        return out

    if isinstance(s, DynAt):
        for d in transitions(s.body, g, s.place, resilient):
            lab = mask_at_return(d.label, live) if resilient else d.label
            target = None if d.target is None else DynAt(s.place, d.target, s.label)
            out.append(_lift("At", p, lab, s, g, d, target))
        return out

    if isinstance(s, TryCatch):
        for d in transitions(s.body, g, p, resilient):
            lab = d.label
            if lab.kind != "sync":
                target = None if d.target is None else TryCatch(d.target, s.handler, s.label)
                out.append(_lift("Try", p, lab, s, g, d, target))
            elif live:
                target = s.handler if d.target is None else Seq(d.target, s.handler, s.label)
                out.append(_lift("Try", p, OK, s, g, d, target))
            elif lab.exc == "DP":
                out.append(_lift("Try", p, lab, s, g, d, d.target))
        return out

    raise TypeError(f"not a statement: {s!r}")


def _expr_ctx(s, slot: str, g: GlobalHeap, p: int) -> Transition:
    """Rule (Ctx): one evaluation step of the expression in ``slot``."""
    e = getattr(s, slot)
    out = eval_step(e, g[p], p)
    assert out is not ALREADY_VALUE
    if isinstance(out, Thrown):
        return Transition(f"Ctx/{out.rule}", p, SyncExc(out.exc), s, g, None, g)
    target = replace(s, **{slot: out.expr})
    return Transition(f"Ctx/{out.rule}", p, OK, s, g, target, g.with_local(p, out.heap))


def end_of_finish_label(mu: frozenset, lab: Label, p_live: bool = True) -> Label:
    """Label emitted when a finish terminates, given its collected exceptions."""
    if not merge_exceptions(mu, lab):
        return OK
    return SyncExc("E") if p_live else SyncExc("DP")


def mask_at_return(lab: Label, caller_live: bool) -> Label:
    if lab.kind == "sync" and not caller_live:
        return SyncExc("DP")
    return lab


# ------------------------------------------------------------- programs

def stmt_transitions(s, g: GlobalHeap, p: int) -> list:
    return transitions(s, g, p, resilient=False)


def wrap(program):
    """The implicit ``finish at(0)`` activation of a source program."""
    L = WRAPPER_LABEL
    return Finish(frozenset(), DynAt(0, Seq(program, Skip(L), L), L), L)


def program_transitions(k) -> list:
    if isinstance(k, Done):
        return []
    return stmt_transitions(k.stmt, k.heap, 0)


def transition_key(t: Transition) -> tuple:
    """Fixed total order used by deterministic scheduling."""
    return (t.rule_chain, _path(t), str(t.label), show(t.target) if t.target else "")


def _path(t: Transition) -> tuple:
    # Par steps the right component; everything else stays leftmost
    return tuple(1 if n.rule == "Par" else 0 for n in t.chain)


class StepLimit(Exception):
    pass


@dataclass
class Trace:
    initial: object
    steps: list

    @property
    def final(self):
        return self.steps[-1].target_config if self.steps else self.initial


def run_trace(program, g0: GlobalHeap, policy: str = "deterministic-first",
              seed: int = 0, max_steps: int = 10_000, successors=None) -> Trace:
    """Run one maximal trace of the wrapped program.

    ``successors(k, i)`` overrides the transition generator (used by the
    resilient runner); it defaults to :func:`program_transitions`.
    """
    successors = successors or (lambda k, i: program_transitions(k))
    rng = random.Random(seed)
    k = Running(wrap(program), g0)
    trace = Trace(k, [])
    for i in range(max_steps):
        ts = sorted(successors(k, i), key=transition_key)
        if not ts:
            return trace
        t = ts[0] if policy == "deterministic-first" else rng.choice(ts)
        trace.steps.append(t)
        k = t.target_config
    if successors(k, max_steps):
        raise StepLimit(f"no terminal configuration within {max_steps} steps")
    return trace


def trace_records(trace: Trace, resilient: bool = False) -> list:
    """One dict per transition with a fixed key order."""
    out = []
    for i, t in enumerate(trace.steps):
        rec = {
            "step": i,
            # the place where the axiom fires, not the top-level place
            "place": t.chain[-1].place,
            "rule": t.rule_chain,
            "label": t.label.kind,
            "exc": t.label.exc or "-",
            "stmt": show(t.target) if t.target is not None else "<done>",
            "heap": digest(t.result),
        }
        if resilient:
            rec["live"] = ",".join(str(q) for q in sorted(t.result.dom))
            rec["injected"] = t.injected
        out.append(rec)
    return out


def format_record(rec: dict) -> str:
    return " | ".join(f"{k}={v}" for k, v in rec.items())


def observable_semantics(program, g0: GlobalHeap, depth_bound: int = 200,
                         successors=None):
    """All final heaps reachable within ``depth_bound`` top-level steps.

    Returns ``(pairs, bound_hit)`` where pairs is a set of ``(g0, g')``.
    """
    successors = successors or (lambda k: program_transitions(k))
    frontier = {Running(wrap(program), g0)}
    finals, seen, bound_hit = set(), set(frontier), False
    for _ in range(depth_bound):
        nxt = set()
        for k in frontier:
            for t in successors(k):
                k2 = t.target_config
                if isinstance(k2, Done):
                    finals.add((g0, k2.heap))
                elif k2 not in seen:
                    seen.add(k2)
                    nxt.add(k2)
        frontier = nxt
        if not frontier:
            break
    else:
        bound_hit = bool(frontier)
    return finals, bound_hit
