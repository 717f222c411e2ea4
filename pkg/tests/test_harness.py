import pytest

from reachlogic.core import BinOp, IJump, Op, State, Store, mem_read, subexprs
from reachlogic.harness import suites
from reachlogic.harness.corpus import LITMUS, case_names, load_case, load_corpus
from reachlogic.harness.oracle import (
    StateSpace,
    check_triple,
    input_variables,
    models_of,
    oracle,
    oracle_exploit_set,
    satisfying,
    touched_constant_cells,
    witness_model_union,
)
from reachlogic.harness.randprog import GenOptions, random_cases
from reachlogic.interpreter import Exited, run
from reachlogic.parser import parse_predicate, parse_program
from reachlogic.predicate import Model, holds
from reachlogic.search import explore


def test_corpus_layout():
    names = case_names()
    assert set(LITMUS) <= set(names)
    assert {"quicksort", "karatsuba"} <= set(names)
    for case in load_corpus():
        assert case.program.blocks and case.post is not None
        assert case.litmus == (case.name in LITMUS)


def test_state_space():
    sp = StateSpace.of({"x": (0, 2), "y": [5]}, {3: (0, 2)}, fixed={"z": 9})
    states = list(sp)
    assert len(sp) == len(states) == 4
    assert states[0] == State.of({"x": 0, "y": 5, "z": 9}, {3: 0})
    assert sp.to_json() == {"vars": {"x": [0, 2], "y": [5]}, "cells": {"3": [0, 2]}, "fixed": {"z": 9}}


def test_input_variables_are_live_reads():
    p = parse_program("entry 0 block 0: i := 1; x := x - y; jump (i < n) 0 1 block 1: exit")
    assert input_variables(p, parse_predicate("x == k")) == {"x", "y", "n", "k"}
    p = parse_program("entry 0 block 0: d <- some d < n; exit")
    assert input_variables(p, parse_predicate("d == 0")) == {"n"}
    assert touched_constant_cells(p, parse_predicate("[3] == [x]")) == {3}


def test_ndloop_oracle():
    case = load_case("ndloop")
    got = oracle_exploit_set(case.program, case.post, case.space, 10, (0, 8))
    assert sorted(s.lookup("n") for s in got) == [4, 6]


def test_indirect_oracle():
    case = load_case("indirect")
    got = oracle_exploit_set(case.program, case.post, case.space, 16, (-8, 8))
    assert [s.var_dict() for s in got] == [{"x": 2}]


def test_division_oracle_by_hand():
    # block 1 subtracts once, the loop stops at x <= y, so the final x is y
    # exactly when y divides x with quotient at least 3
    case = load_case("division")
    sp = StateSpace.of({"x": (0, 16), "y": (1, 16)})
    res = oracle(case.program, case.post, sp, 64, (0, 16))
    expected = {(x, y) for x in range(16) for y in range(1, 16) if x >= 3 * y and x % y == 0}
    assert {(s.lookup("x"), s.lookup("y")) for s in res.states} == expected
    assert not res.nonterminating and res.max_edges >= 2


def test_oracle_agrees_with_concrete_runs():
    case = load_case("division")
    sp = StateSpace.of({"x": (0, 10), "y": (1, 5)})
    res = oracle(case.program, case.post, sp, 64, (0, 10))
    for s in sp:
        out = run(case.program, s, fuel=64)
        hit = isinstance(out, Exited) and holds(case.post, Model.from_state(out.state))
        assert hit == (s in res.states)
        if hit:
            assert res.exploits[s] == len(out.trace) - 1


def test_satisfying_is_lazy_and_memoized():
    p = parse_predicate("x > 0")
    sp = list(StateSpace.of({"x": (-2, 3), "y": (0, 50)}))
    assert len(models_of(p, sp)) == 2 * 50
    first = next(satisfying(p, iter(sp)))
    assert first.lookup("x") == 1
    assert witness_model_union([p, parse_predicate("x == -2")], sp) == frozenset(
        s for s in sp if s.lookup("x") in (-2, 1, 2)
    )


def test_check_triple():
    p = load_case("division").program
    q = parse_predicate("x >= y")
    assert check_triple(p, q, parse_predicate("x == 4*y && y > 0"), (0, 8), 64).confirmed
    bad = check_triple(p, q, parse_predicate("x == y + 1 && y > 1"), (0, 8), 64)
    assert not bad.confirmed
    x, y = bad.counterexample.lookup("x"), bad.counterexample.lookup("y")
    assert x == y + 1 and y > 1
    assert check_triple(p, q, parse_predicate("0"), (0, 8), 64).checked == 0


def test_random_programs_respect_the_shape():
    for p, q in random_cases(3, 300):
        assert len(p.blocks) <= 4
        for b in p.blocks.values():
            assert len(b.stmts) <= 3
            assert not isinstance(b.term, IJump)
            for s in b.stmts:
                for e in vars(s).values():
                    if not isinstance(e, str):
                        assert not any(isinstance(n, BinOp) and n.op in (Op.DIV, Op.MOD) for n in subexprs(e))
        assert p.exit_blocks


def test_random_programs_are_deterministic():
    assert list(random_cases(5, 20)) == list(random_cases(5, 20))
    assert list(random_cases(5, 20)) != list(random_cases(6, 20))


def test_constant_address_option():
    for p, _ in random_cases(1, 200, GenOptions(variable_addresses=False)):
        for b in p.blocks.values():
            for s in b.stmts:
                if isinstance(s, Store):
                    assert not s.addr.__class__.__name__ == "Var"


def test_litmus_suite_passes():
    rep = suites.litmus_suite()
    assert rep.passed, [c.line() for c in rep.checks]
    assert len(rep.checks) == 4


def test_soundness_suite_small():
    rep = suites.soundness_suite(count=30, seed=123)
    assert rep.passed, [str(v) for v in rep.violations]
    assert rep.checked == 34


def test_polarity_mutation_is_caught():
    with suites.polarity_mutation():
        rep = suites.soundness_suite(count=30, seed=123, stop_on_violation=True)
    assert not rep.passed
    v = rep.violations[0]
    assert "cannot reach" in str(v)


def test_completeness_suite_small():
    rep = suites.completeness_suite(count=20, seed=99)
    assert rep.passed, [str(v) for v in rep.violations]
    assert rep.checked >= 2  # the terminating corpus cases at least


def test_completeness_skips_are_counted():
    nonterm = parse_program("entry 0 block 0: jump (x < 100) 0 1 block 1: exit")
    rep = suites.SuiteReport("c")
    cfg = suites.random_config((-4, 4))
    suites._completeness_case(nonterm, parse_predicate("1"), cfg, StateSpace.of({"x": (-4, 4)}), 8, rep)
    assert rep.skipped == {"nonterminating": 1} and rep.checked == 0


def test_axioms_suite():
    rep = suites.axioms_suite(n=500)
    assert rep.passed and rep.checked == 500


def test_karatsuba_smoke():
    case = load_case("karatsuba")
    ws, report = explore(case.program, case.post, case.limits, case.sat_config)
    assert report.generated > 0
    assert report.stopped_by in ("max-depth", "max-nodes", "frontier-empty", "max-cases", "max-size")


@pytest.mark.parametrize("x0, x1, y0, y1", [(200, 3, 7, 9), (255, 255, 255, 255), (0, 1, 1, 0)])
def test_karatsuba_encoding(x0, x1, y0, y1):
    case = load_case("karatsuba")
    env = {"x0": x0, "x1": x1, "y0": y0, "y1": y1, "xp": 0, "yp": 2}
    mem = {0: x0, 1: x1, 2: y0, 3: y1}
    # disjoint result buffer: the product is right, so the mismatch is false
    out = run(case.program, State.of({**env, "rp": 10}, mem), fuel=case.fuel)
    assert isinstance(out, Exited)
    assert not holds(case.post, Model.from_state(out.state))
    # result overlapping the high byte of x: the early store corrupts it
    out = run(case.program, State.of({**env, "rp": 1}, mem), fuel=case.fuel)
    assert isinstance(out, Exited)
    assert holds(case.post, Model.from_state(out.state)) == (x0 * y0 % 256 != x1)


@pytest.mark.parametrize("arr, member", [((2, 1, 3), True), ((0, 1, 2), False)])
def test_quicksort_examples(arr, member):
    case = load_case("quicksort")
    s = State.of({}, dict(enumerate(arr)))
    res = oracle(case.program, case.post, [s], case.fuel, case.domain)
    assert (s in res.states) == member
    assert member == (arr[0] > min(arr))
    assert mem_read(0, s.mem) == arr[0]
