"""Resilient TX10: place failure injection on top of the resilient rules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .heap import GlobalHeap
from .step import (OK, Done, Transition, end_of_finish_label, mask_at_return,
                   run_trace, transitions)

__all__ = ["FailurePolicy", "fail_place", "end_of_finish_label", "mask_at_return",
           "stmt_transitions_res", "program_transitions_res", "run_trace_res"]


@dataclass(frozen=True)
class FailurePolicy:
    """Which places may fail, how often, and when.

    ``schedule`` is ``None`` for before-every-step injection, otherwise a
    tuple of ``(step index, place)`` pairs.
    """

    max_failures: int = 1
    candidates: frozenset = field(default=frozenset({1, 2}))
    schedule: Optional[tuple] = None

    def __post_init__(self):
        if 0 in self.candidates:
            raise ValueError("place 0 never fails")

    def eligible(self, g: GlobalHeap, step_index: Optional[int] = None) -> list:
        failed = sum(1 for q in self.candidates if not g.live(q))
        if failed >= self.max_failures:
            return []
        if self.schedule is None:
            return sorted(q for q in self.candidates if g.live(q))
        return sorted(q for i, q in self.schedule
                      if i == step_index and q in self.candidates and g.live(q))


NO_FAILURES = FailurePolicy(max_failures=0, candidates=frozenset())


def unlimited(places: int) -> FailurePolicy:
    return FailurePolicy(max_failures=places, candidates=frozenset(range(1, places)))


def fail_place(g: GlobalHeap, p: int) -> GlobalHeap:
    if p == 0:
        raise ValueError("place 0 never fails")
    if not g.live(p):
        raise ValueError(f"place {p} has already failed")
    return g.without(p)


def failure_transitions(s, g: GlobalHeap, fp: FailurePolicy,
                        step_index: Optional[int] = None) -> list:
    return [Transition("Place Failure", q, OK, s, g, s, fail_place(g, q), injected=True)
            for q in fp.eligible(g, step_index)]


def stmt_transitions_res(s, g: GlobalHeap, p: int, fp: FailurePolicy = NO_FAILURES,
                         step_index: Optional[int] = None) -> list:
    return transitions(s, g, p, resilient=True) + failure_transitions(s, g, fp, step_index)


def program_transitions_res(k, fp: FailurePolicy, step_index: Optional[int] = None) -> list:
    if isinstance(k, Done):
        return []
    return stmt_transitions_res(k.stmt, k.heap, 0, fp, step_index)


def run_trace_res(program, g0: GlobalHeap, fp: FailurePolicy, successors=None, **kw):
    """One trace under failures.

    A scheduled failure is forced in a single run: when the schedule fires
    at step ``i`` the trace takes the injection.  Exploration instead keeps
    it as one branch among the others.
    """
    base = successors or (lambda k, i: program_transitions_res(k, fp, i))

    def forced(k, i):
        ts = base(k, i)
        if fp.schedule is not None:
            injected = [t for t in ts if t.injected]
            if injected:
                return injected
        return ts

    return run_trace(program, g0, successors=forced, **kw)
