"""
Which inputs make a buggy division loop overshoot?
==================================================

The loop guard uses ``x > y`` where ``x >= y`` was meant, so the remainder
can end up equal to the divisor.  Backward search from ``x >= y`` produces
one precondition per path, and each one is checked against brute force.
"""

from reachlogic.harness.corpus import load_case
from reachlogic.harness.oracle import StateSpace, oracle, witness_model_union
from reachlogic.parser import format_predicate
from reachlogic.search import explore

case = load_case("division")
print(case.program_text)

ws, report = explore(case.program, case.post, case.limits, case.sat_config)
for w in ws:
    path = " -> ".join(str(a) for a in w.addrs)
    print(f"depth {w.depth} [{w.verdict}] {path}")
    print("    " + format_predicate(w.precondition))
print(report)

# every satisfiable witness describes inputs that really overshoot
space = list(StateSpace.of({"x": (0, 16), "y": (0, 16)}))
union = witness_model_union([w.precondition for w in ws if w.satisfiable], space, (0, 16))
truth = oracle(case.program, case.post, space, case.fuel, (0, 16))
short = {s for s, k in truth.exploits.items() if k <= case.limits.max_depth}
print(len(union), "states admitted,", len(short), "found by exhaustive runs:", union == short)
