"""Bounded weak bisimilarity: one verified law, one refuted law, and a replayed witness."""
from tx10.bisim import BisimGame, replay, weak_bisim
from tx10.explore import TX10, Resilient
from tx10.laws import PLACES, initial_heap, law_suite, report_lines
from tx10.parser import parse_program
from tx10.resilient import unlimited
from tx10.step import Running
from tx10.syntax import erase_labels


def cfg(text):
    return Running(erase_labels(parse_program(text, allow_dynamic=True)), initial_heap())


# splitting a place shift is invisible without failures, visible with them
left = "at (0) { val x = {f: E} in { x.f = BF; } skip; }"
right = "at (0) { val x = {f: E} in { x.f = BF; } } at (0) { skip; }"
print(weak_bisim(cfg(left), cfg(right), TX10, 8, PLACES))
game = BisimGame(resilient=True, places=PLACES)
verdict = weak_bisim(cfg(left), cfg(right), Resilient(unlimited(PLACES)), 8, PLACES, game=game)
print("\n".join(verdict.lines()))
print("replayed:", replay(cfg(left), cfg(right), verdict.witness, game))

print()
for line in report_lines(law_suite("tx10", 8, {3, 8, 24}), "tx10", 8):
    print(line)
