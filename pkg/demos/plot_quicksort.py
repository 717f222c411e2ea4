"""
Out-of-bounds access in a partition step
========================================

The partition loop scans right without a bound check.  On a three-element
array it walks off the end exactly when the first element (the pivot) is
not the smallest one.  Here that shows up as the union of witness models.
"""

from itertools import product

from reachlogic.core import State
from reachlogic.harness.corpus import load_case
from reachlogic.harness.oracle import witness_model_union
from reachlogic.search import explore

case = load_case("quicksort")
ws, report = explore(case.program, case.post, case.limits, case.sat_config)
sat = [w.precondition for w in ws if w.satisfiable]
print(len(ws), "witnesses,", len(sat), "satisfiable;", report.stopped_by)

arrays = list(product(range(4), repeat=3))
space = [State.of({}, dict(enumerate(a))) for a in arrays]
bad = witness_model_union(sat, space, case.sat_config.domain)
for a, s in zip(arrays, space):
    if s in bad:
        print(a)
