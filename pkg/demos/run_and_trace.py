"""Run one program step by step, then replay it under a scheduled place failure."""
from pathlib import Path

from tx10.heap import GlobalHeap, digest
from tx10.parser import parse_program
from tx10.resilient import FailurePolicy, run_trace_res
from tx10.step import format_record, run_trace, trace_records

HERE = Path(__file__).parent
program = parse_program((HERE / "programs" / "copy_graph.tx10").read_text())
g0 = GlobalHeap.empty(3)

print("-- failure-free run: the cyclic object graph is copied to place 1")
trace = run_trace(program, g0, "deterministic-first", 0, 1000)
for rec in trace_records(trace):
    print(format_record(rec))
print("final heap:", digest(trace.final.heap))

print("\n-- place 1 fails just before the place shift")
nested = parse_program((HERE / "programs" / "nested_finish.tx10").read_text())
fp = FailurePolicy(max_failures=1, candidates=frozenset({1}), schedule=((1, 1),))
trace = run_trace_res(nested, g0, fp, policy="deterministic-first", seed=0, max_steps=1000)
for rec in trace_records(trace, resilient=True):
    print(format_record(rec))
