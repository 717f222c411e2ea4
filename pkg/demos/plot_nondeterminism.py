"""
Nondeterministic choice becomes an existential
==============================================

``d <- some 1 < d && d < n`` picks any proper divisor candidate.  Its
precondition quantifies over the choice, which is true exactly for
composite ``n``.
"""

from reachlogic.harness.corpus import load_case
from reachlogic.parser import format_predicate
from reachlogic.predicate import Model, holds
from reachlogic.sat import check_sat
from reachlogic.search import explore

case = load_case("ndloop")
ws, _ = explore(case.program, case.post, case.limits, case.sat_config)
w = next(w for w in ws if w.depth == 1)
print(format_predicate(w.precondition))
print(check_sat(w.precondition, case.sat_config))

for n in range(8):
    print(n, holds(w.precondition, Model({"n": n}), case.sat_config.domain))
