"""
Aliasing cases behind two stores
================================

A store may or may not overwrite the cell a postcondition reads.  Going
backward over ``[b] := [a]; [d] := [c]`` splits ``[e] == z`` into one
precondition per aliasing pattern.  The search tree is written as DOT.
"""

from reachlogic.harness.corpus import load_case
from reachlogic.parser import format_predicate
from reachlogic.search import Exploration, Limits, SearchGraph, to_dot

case = load_case("doublestore")
graph = SearchGraph()
for w in Exploration(case.program, case.post, Limits(max_depth=0), case.sat_config, graph):
    print(format_predicate(w.precondition), "   via", w.case_tags)

# render with: dot -Tsvg doublestore.dot > doublestore.svg
with open("doublestore.dot", "w") as f:
    f.write(to_dot(graph))
