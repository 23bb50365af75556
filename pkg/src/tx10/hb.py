"""Happens-before extraction from an explored LTS, and its invariance check.

A node's guaranteed set is the set of labels activated on every root
path to it: ``G(root) = A(root)`` and ``G(n) = A(n) | meet of G(pred)``,
computed as a greatest fixpoint.  ``(L1, L2)`` is in the relation when
every node activating ``L2`` has ``L1`` in its guaranteed set.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .explore import TX10, Lts, Resilient, Semantics, explore
from .heap import GlobalHeap
from .resilient import FailurePolicy
from .step import Done
from .syntax import WRAPPER_LABEL, active_labels, labels, show


def _active(k) -> frozenset:
    if isinstance(k, Done):
        return frozenset()
    return active_labels(k.stmt) - {WRAPPER_LABEL}


def guaranteed(lts: Lts) -> list:
    n = len(lts.nodes)
    act = [_active(k) for k in lts.nodes]
    universe = frozenset().union(*act) if act else frozenset()
    preds = lts.predecessors()
    G = [universe] * n
    G[lts.root] = act[lts.root]
    order = sorted(range(n), key=lambda i: lts.depth[i])
    changed = True
    while changed:
        changed = False
        for i in order:
            if i == lts.root:
                continue
            meet = universe
            for e in preds[i]:
                meet = meet & G[e.src]
            new = act[i] | meet
            if new != G[i]:
                G[i], changed = new, True
    return G


@dataclass
class HBRelation:
    pairs: frozenset
    labels: frozenset
    bound_hit: bool = False

    def lines(self) -> list:
        return [f"hb {a} < {b}" for a, b in sorted(self.pairs)]


def relation_from_lts(lts: Lts, all_labels) -> HBRelation:
    G = guaranteed(lts)
    act = [_active(k) for k in lts.nodes]
    pairs = set()
    for l2 in all_labels:
        nodes = [i for i in range(len(lts.nodes)) if l2 in act[i]]
        for l1 in all_labels:
            if l1 != l2 and all(l1 in G[i] for i in nodes):
                pairs.add((l1, l2))
    return HBRelation(frozenset(pairs), frozenset(all_labels), not lts.complete)


def happens_before(program, sem: Semantics = TX10, places: int = 3,
                   depth: int = 40, max_nodes: int = 200_000) -> HBRelation:
    lts = explore(program, GlobalHeap.empty(places), sem, depth, max_nodes)
    return relation_from_lts(lts, labels(program) - {WRAPPER_LABEL})


@dataclass
class HBIVerdict:
    equal: bool
    only_tx10: frozenset
    only_resilient: frozenset
    witness: Optional[list] = None  # trace in the calculus lacking the pair
    bound_hit: bool = False

    def lines(self) -> list:
        out = [f"hbi equal={self.equal} only_tx10={sorted(self.only_tx10)} "
               f"only_resilient={sorted(self.only_resilient)}"
               + (" bounded-only" if self.bound_hit else "")]
        for i, t in enumerate(self.witness or []):
            target = show(t.target) if t.target is not None else "<done>"
            out.append(f"  step={i} rule={t.rule_chain} label={t.label} stmt={target}")
        return out


def _counter_trace(lts: Lts, pair):
    """A root path reaching a node that activates L2 without ever activating L1."""
    l1, l2 = pair
    G = guaranteed(lts)
    for i, k in enumerate(lts.nodes):
        if l2 in _active(k) and l1 not in G[i]:
            path = lts.path_to(i, avoid=lambda j: l1 in _active(lts.nodes[j]))
            if path is not None:
                return [e.transition for e in path]
    return None


def check_hbi(program, places: int = 3, fp: FailurePolicy = FailurePolicy(2),
              depth: int = 40, resilient_sem: Semantics = None,
              max_nodes: int = 200_000) -> HBIVerdict:
    """Compare the relation under the failure-free and resilient calculi."""
    rsem = resilient_sem or Resilient(fp)
    g0 = GlobalHeap.empty(places)
    all_labels = labels(program) - {WRAPPER_LABEL}
    l0 = explore(program, g0, TX10, depth, max_nodes)
    l1 = explore(program, g0, rsem, depth, max_nodes)
    h0, h1 = relation_from_lts(l0, all_labels), relation_from_lts(l1, all_labels)
    only0, only1 = h0.pairs - h1.pairs, h1.pairs - h0.pairs
    witness = None
    if only0:
        witness = _counter_trace(l1, min(only0))
    elif only1:
        witness = _counter_trace(l0, min(only1))
    return HBIVerdict(not (only0 or only1), frozenset(only0), frozenset(only1),
                      witness, h0.bound_hit or h1.bound_hit)
