"""Executable small-step semantics for TX10 and Resilient TX10."""
from .heap import GlobalHeap, LocalHeap, copy, digest, make_heap
from .parser import ParseError, ScopeError, parse_program
from .resilient import FailurePolicy, fail_place, stmt_transitions_res
from .step import (OK, AsyncExc, Done, Label, Running, SyncExc, Transition,
                   program_transitions, run_trace, stmt_transitions, wrap)
from .syntax import classify, show

__version__ = "0.1.0"

__all__ = [
    "GlobalHeap", "LocalHeap", "copy", "digest", "make_heap",
    "ParseError", "ScopeError", "parse_program",
    "FailurePolicy", "fail_place", "stmt_transitions_res",
    "OK", "AsyncExc", "Done", "Label", "Running", "SyncExc", "Transition",
    "program_transitions", "run_trace", "stmt_transitions", "wrap",
    "classify", "show",
]
