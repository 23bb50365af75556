"""Exhaustive state-space exploration and metatheory checks over the LTS."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .heap import GlobalHeap, LocalHeap, is_place_local
from .resilient import NO_FAILURES, FailurePolicy, failure_transitions
from .step import Done, Running, Transition, transition_key, transitions, wrap
from .syntax import (GlobalRef, Oid, is_async, is_local, is_remote, is_sync,
                     map_values, no_async, placed_values, show, stmt_values)


# ------------------------------------------------------------ semantics

@dataclass(frozen=True)
class Semantics:
    """Which calculus to step with.

    ``drop`` is a fault-seeding hook: transitions for which it returns
    True are discarded.  Tests use it to check that the checkers notice.
    """

    resilient: bool = False
    fp: FailurePolicy = NO_FAILURES
    drop: Optional[Callable] = field(default=None, compare=False)

    @property
    def name(self):
        return "resilient" if self.resilient else "tx10"

    def step(self, s, g: GlobalHeap, p: int, step_index=None) -> list:
        out = transitions(s, g, p, self.resilient)
        if self.resilient:
            out = out + failure_transitions(s, g, self.fp, step_index)
        if self.drop is not None:
            out = [t for t in out if not self.drop(t)]
        return out

    def successors(self, k, step_index=None) -> list:
        if isinstance(k, Done):
            return []
        return sorted(self.step(k.stmt, k.heap, 0, step_index), key=transition_key)


TX10 = Semantics()


def Resilient(fp: FailurePolicy = FailurePolicy()) -> Semantics:
    return Semantics(resilient=True, fp=fp)


# ------------------------------------------------------- canonical forms

def _rename(value, mapping):
    if isinstance(value, Oid):
        return mapping.get(value, value)
    if isinstance(value, GlobalRef):
        return GlobalRef(mapping.get(value.oid, value.oid))
    return value


def _refinement(g: GlobalHeap, named: dict, pending: list, rounds: int = 4) -> dict:
    """Rename-invariant signatures of unnamed objects (colour refinement)."""
    def leaf(v, sig):
        o = v.oid if isinstance(v, GlobalRef) else v
        if not isinstance(o, Oid):
            return str(v)
        tag = "gr" if isinstance(v, GlobalRef) else "o"
        return f"{tag}{named[o]}" if o in named else f"{tag}?{sig.get(o, '')}"

    sig = {o: "" for o in pending}
    for _ in range(rounds):
        sig = {o: repr((o.place, [(f, leaf(v, sig)) for f, v in g.lookup(o)]))
               for o in pending}
    return sig


def oid_renaming(stmts, g: GlobalHeap) -> dict:
    """Per-place consecutive serials, invariant under renaming the input's oids.

    Objects reachable from the statements are named in depth-first,
    field-order visit order; unreachable objects follow, picked by a
    rename-invariant signature.
    """
    mapping, next_serial = {}, {}
    heap_oids = set(g.all_oids())

    def visit(v):
        stack = [v]
        while stack:
            o = stack.pop()
            o = o.oid if isinstance(o, GlobalRef) else o
            if not isinstance(o, Oid) or o in mapping:
                continue
            n = next_serial.get(o.place, 0)
            mapping[o] = Oid(o.place, n)
            next_serial[o.place] = n + 1
            if o in heap_oids:
                stack.extend(reversed([w for _, w in g.lookup(o)]))

    for s in stmts:
        for v in stmt_values(s):
            visit(v)
    while True:
        pending = [o for o in heap_oids if o not in mapping]
        if not pending:
            return mapping
        sig = _refinement(g, mapping, pending)
        visit(min(pending, key=lambda o: (o.place, sig[o], o.serial)))


def rename_heap(g: GlobalHeap, mapping: dict) -> GlobalHeap:
    return GlobalHeap({
        p: LocalHeap({_rename(o, mapping): tuple((f, _rename(v, mapping)) for f, v in r)
                      for o, r in h.items()})
        for p, h in g.items()})


def rename_stmt(s, mapping: dict):
    return map_values(s, lambda v: _rename(v, mapping))


def canonicalize(k):
    """Rename oids so configurations equal up to oid renaming coincide."""
    if isinstance(k, Done):
        mapping = oid_renaming((), k.heap)
        return Done(rename_heap(k.heap, mapping))
    mapping = oid_renaming((k.stmt,), k.heap)
    return Running(rename_stmt(k.stmt, mapping), rename_heap(k.heap, mapping))


# ---------------------------------------------------------------- the LTS

@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    transition: Transition


@dataclass
class Lts:
    root: int
    nodes: list
    edges: list
    depth: list
    expanded: set
    bound_hit: bool = False
    budget_hit: bool = False
    out: dict = field(default_factory=dict)

    @property
    def complete(self):
        return not (self.bound_hit or self.budget_hit)

    def stats(self) -> dict:
        return {"nodes": len(self.nodes), "edges": len(self.edges),
                "depth": max(self.depth, default=0), "boundHit": self.bound_hit}

    def successors(self, i) -> list:
        return self.out.get(i, [])

    def predecessors(self) -> dict:
        preds = {i: [] for i in range(len(self.nodes))}
        for e in self.edges:
            preds[e.dst].append(e)
        return preds

    def path_to(self, target: int, avoid=None) -> Optional[list]:
        """Edges of a shortest root path to ``target``; ``avoid(i)`` bans nodes."""
        if avoid and avoid(self.root):
            return None
        back = {self.root: None}
        queue = deque([self.root])
        while queue:
            i = queue.popleft()
            if i == target:
                path = []
                while back[i] is not None:
                    e = back[i]
                    path.append(e)
                    i = e.src
                return path[::-1]
            for e in self.successors(i):
                if e.dst not in back and not (avoid and avoid(e.dst)):
                    back[e.dst] = e
                    queue.append(e.dst)
        return None


class NodeBudgetExceeded(Exception):
    def __init__(self, lts):
        super().__init__(f"node budget exhausted after {len(lts.nodes)} nodes")
        self.lts = lts


def explore(program, g0: GlobalHeap, sem: Semantics = TX10, depth: int = 12,
            max_nodes: int = 100_000, wrapped: bool = True,
            raise_on_budget: bool = False) -> Lts:
    """Breadth-first exploration of the wrapped program up to ``depth`` steps.

    With ``wrapped=False`` ``program`` is a configuration to start from.
    The step index passed to scheduled failure policies is the BFS depth.
    """
    k0 = Running(wrap(program), g0) if wrapped else program
    root = canonicalize(k0)
    index = {root: 0}
    lts = Lts(root=0, nodes=[root], edges=[], depth=[0], expanded=set())
    queue = deque([0])
    while queue:
        i = queue.popleft()
        k = lts.nodes[i]
        if isinstance(k, Done):
            continue
        if lts.depth[i] >= depth:
            lts.bound_hit = True
            continue
        lts.expanded.add(i)
        outs = []
        for t in sem.successors(k, lts.depth[i]):
            k2 = canonicalize(t.target_config)
            j = index.get(k2)
            if j is None:
                if len(lts.nodes) >= max_nodes:
                    lts.budget_hit = True
                    if raise_on_budget:
                        raise NodeBudgetExceeded(lts)
                    continue
                j = index[k2] = len(lts.nodes)
                lts.nodes.append(k2)
                lts.depth.append(lts.depth[i] + 1)
                queue.append(j)
            e = Edge(i, j, t)
            lts.edges.append(e)
            outs.append(e)
        lts.out[i] = outs
    return lts


def maximal_paths(lts: Lts) -> int:
    """Number of root-to-leaf paths (the LTS of a terminating program is a DAG)."""
    memo, on_stack = {}, set()
    stack = [(lts.root, False)]
    while stack:
        i, children_done = stack.pop()
        if children_done:
            on_stack.discard(i)
            outs = lts.successors(i)
            memo[i] = sum(memo[e.dst] for e in outs) if outs else 1
            continue
        if i in memo:
            continue
        on_stack.add(i)
        stack.append((i, True))
        for e in lts.successors(i):
            if e.dst in on_stack:
                raise ValueError("the LTS has a cycle; path count is unbounded")
            if e.dst not in memo:
                stack.append((e.dst, False))
    return memo[lts.root]


# ------------------------------------------------------------- the checks

CHECKS = ("no-stuck", "place-local", "place-zero", "sync-fail", "async-redux",
          "finish-shield", "emp", "fpp", "local-failure", "remote")


@dataclass
class CheckResult:
    name: str
    ok: bool
    witness: Optional[str] = None
    bounded_only: bool = False
    examined: int = 0

    def line(self) -> str:
        status = "pass" if self.ok else "FAIL"
        extra = " bounded-only" if self.bounded_only else ""
        w = f" witness={self.witness}" if self.witness else ""
        return f"check={self.name} | result={status} | examined={self.examined}{extra}{w}"


def _describe_node(k) -> str:
    if isinstance(k, Done):
        return f"<done> heap=[{k.heap!r}]"
    return f"<{show(k.stmt)}> heap=[{k.heap!r}]"


def _describe_edge(t: Transition) -> str:
    return (f"{t.rule_chain} at {t.place} label={t.label} "
            f"from <{show(t.source)}>")


def config_place_local(k):
    """``None`` or a witness: heap locality plus oids evaluated at their home place."""
    w = is_place_local(k.heap)
    if w is not None:
        return f"heap place {w[0]} object {w[1]} holds {w[2]}"
    if isinstance(k, Done):
        return None
    for q, v in placed_values(k.stmt, 0):
        if isinstance(v, Oid):
            if v.place != q:
                return f"oid {v} used at place {q}"
            if k.heap.live(q) and v not in k.heap[q]:
                return f"oid {v} missing from the heap of place {q}"
    return None


def _derivations(lts: Lts):
    for e in lts.edges:
        for n in e.transition.chain:
            yield e, n


def _dead(n: Transition) -> bool:
    return not n.heap.live(n.place)


def _fpp_holds(n: Transition) -> bool:
    p = n.place
    for m in n.chain:
        if m.place != p:
            break
        if m.label.kind == "ok" and is_remote(m.source, p):
            return True
        if (m.rule == "Finish" and m.premise is not None
                and m.premise.label.exc == "DP"):
            return True
    return False


def check_invariants(lts: Lts, which=CHECKS, sem: Semantics = None) -> list:
    """One :class:`CheckResult` per requested check, in the requested order."""
    sem = sem or Resilient()
    results = []
    for name in which:
        if name not in CHECKS:
            raise ValueError(f"unknown check {name!r}")
        results.append(_CHECKERS[name](lts, sem))
        results[-1].bounded_only = not lts.complete
    return results


def _no_stuck(lts, sem):
    n = 0
    for i in sorted(lts.expanded):
        n += 1
        if not lts.successors(i):
            return CheckResult("no-stuck", False, "stuck " + _describe_node(lts.nodes[i]), examined=n)
    return CheckResult("no-stuck", True, examined=n)


def _place_local(lts, sem):
    for n, k in enumerate(lts.nodes):
        w = config_place_local(k)
        if w:
            return CheckResult("place-local", False, f"{w} in {_describe_node(k)}", examined=n + 1)
    return CheckResult("place-local", True, examined=len(lts.nodes))


def _place_zero(lts, sem):
    for n, k in enumerate(lts.nodes):
        if not k.heap.live(0):
            return CheckResult("place-zero", False, _describe_node(k), examined=n + 1)
    return CheckResult("place-zero", True, examined=len(lts.nodes))


def _node_check(name, bad):
    def run(lts, sem):
        count = 0
        for _, n in _derivations(lts):
            count += 1
            if bad(n):
                return CheckResult(name, False, _describe_edge(n), examined=count)
        return CheckResult(name, True, examined=count)
    return run


def _sync_fail_bad(n):
    if n.label.kind != "sync" or n.injected:
        return False
    return not is_sync(n.source) or (n.target is not None and not is_async(n.target))


def _async_redux_bad(n):
    return (not n.injected and is_async(n.source)
            and n.target is not None and not is_async(n.target))


def _finish_shield_bad(n):
    return n.rule == "Finish" and n.label.kind != "ok"


def _emp_bad(n):
    return _dead(n) and n.label.kind == "sync" and n.label.exc != "DP"


def _fpp_bad(n):
    return (not n.injected and _dead(n) and n.label.kind == "ok"
            and not _fpp_holds(n))


def _local_failure(lts, sem):
    count, seen = 0, set()
    for _, n in _derivations(lts):
        key = (n.source, n.heap, n.place)
        if key in seen or not _dead(n):
            continue
        seen.add(key)
        if not (no_async(n.source) and is_local(n.source)):
            continue
        count += 1
        ts = transitions(n.source, n.heap, n.place, resilient=True)
        if len(ts) != 1 or str(ts[0].label) != "DP!" or ts[0].target is not None:
            return CheckResult("local-failure", False, _describe_edge(n), examined=count)
    return CheckResult("local-failure", True, examined=count)


def _remote(lts, sem):
    """Remote steps replay after failing the stepping place, labels masked."""
    from .step import mask_at_return
    count, seen = 0, set()
    for _, n in _derivations(lts):
        p = n.place
        if p == 0 or _dead(n) or n.injected or not is_remote(n.source, p):
            continue
        key = (n.source, n.heap, p, n.label, n.target, n.result)
        if key in seen:
            continue
        seen.add(key)
        count += 1
        g_dead = n.heap.without(p)
        want_label = mask_at_return(n.label, False)
        want_result = n.result.without(p) if n.result.live(p) else n.result
        replay = transitions(n.source, g_dead, p, resilient=True)
        if not any(t.label == want_label and t.target == n.target
                   and t.result == want_result for t in replay):
            return CheckResult("remote", False, _describe_edge(n), examined=count)
    return CheckResult("remote", True, examined=count)


_CHECKERS = {
    "no-stuck": _no_stuck,
    "place-local": _place_local,
    "place-zero": _place_zero,
    "sync-fail": _node_check("sync-fail", _sync_fail_bad),
    "async-redux": _node_check("async-redux", _async_redux_bad),
    "finish-shield": _node_check("finish-shield", _finish_shield_bad),
    "emp": _node_check("emp", _emp_bad),
    "fpp": _node_check("fpp", _fpp_bad),
    "local-failure": _local_failure,
    "remote": _remote,
}
