"""Enumerate every interleaving of a small program and check the invariants on it."""
from pathlib import Path

from tx10.explore import CHECKS, TX10, Resilient, check_invariants, explore
from tx10.heap import GlobalHeap, digest
from tx10.parser import parse_program
from tx10.resilient import FailurePolicy
from tx10.step import Done

HERE = Path(__file__).parent
program = parse_program((HERE / "programs" / "interleave.tx10").read_text())

for sem in (TX10, Resilient(FailurePolicy(2))):
    lts = explore(program, GlobalHeap.empty(3), sem, depth=20)
    finals = sorted({digest(k.heap) for k in lts.nodes if isinstance(k, Done)})
    print(f"-- {sem.name}: {len(lts.nodes)} configurations, {len(lts.edges)} edges")
    for h in finals:
        print("   outcome", h)
    for result in check_invariants(lts, CHECKS, sem):
        print("  ", result.line())
