"""Happens-before under both calculi, including a handler that failure makes reachable."""
from pathlib import Path

from tx10.hb import check_hbi, happens_before
from tx10.parser import parse_program
from tx10.resilient import FailurePolicy
from tx10.syntax import show

HERE = Path(__file__).parent
nested = parse_program((HERE / "programs" / "nested_finish.tx10").read_text())
print(show(nested))
for line in happens_before(nested).lines():
    print("  ", line)
print("\n".join(check_hbi(nested, fp=FailurePolicy(2)).lines()))

# the handler can now run before the remote throw was ever activated
handler = parse_program((HERE / "programs" / "remote_throw.tx10").read_text())
print("\n" + show(handler))
print("\n".join(check_hbi(handler, fp=FailurePolicy(2)).lines()))
