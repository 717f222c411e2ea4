import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reachlogic.core import Block, Jump, NDAssign, Program, State
from reachlogic.harness.corpus import load_case
from reachlogic.harness.randprog import ProgramGenerator
from reachlogic.interpreter import (
    EvalFault,
    Exhaustive,
    Exited,
    Fault,
    OutOfFuel,
    Scripted,
    SeededRandom,
    enumerate_runs,
    eval_expr,
    evaluate,
    parse_state,
    reachable_exits,
    run,
    step_stmt,
)
from reachlogic.parser import parse_expr, parse_program

from strategies import Stuck, exprs, ref_eval, states


@given(exprs(), states())
def test_evaluate_matches_reference(e, s):
    env, cells = s.var_dict(), s.mem.as_dict()
    try:
        expected = ref_eval(e, env, cells)
    except Stuck:
        with pytest.raises(EvalFault):
            eval_expr(s, e)
        return
    assert eval_expr(s, e) == expected


def test_unbound_variable_faults():
    with pytest.raises(EvalFault) as exc:
        eval_expr(State.of({}), parse_expr("x + 1"))
    assert exc.value.kind == "unbound"


def test_lookup_hook_sees_only_needed_names():
    seen = []

    def lookup(n):
        seen.append(n)
        return 2

    assert evaluate(parse_expr("a * a + [b]"), lookup, lambda addr: 10 * addr) == 24
    assert sorted(set(seen)) == ["a", "b"]


def test_division_program():
    p = load_case("division").program
    out = run(p, parse_state("x=4,y=1"), fuel=64)
    assert isinstance(out, Exited)
    # x is reduced to 1 after three subtractions, the loop guard stops early
    assert out.state.lookup("x") == 1 and out.state.lookup("i") == 3
    assert out.trace == (0, 1, 2, 2, 3)


def test_indirect_program():
    p = load_case("indirect").program
    out = run(p, parse_state("x=2"))
    assert isinstance(out, Exited) and out.state.lookup("y") == 5
    for x in (0, 1, 3, -1, 4):
        out = run(p, parse_state(f"x={x}"), fuel=50)
        assert not isinstance(out, Exited) or out.state.lookup("y") == 0


def test_ndloop_prime_runs_out_of_fuel():
    p = load_case("ndloop").program
    out = run(p, parse_state("n=5"), SeededRandom(1, (-8, 8)), fuel=10)
    assert isinstance(out, OutOfFuel) and len(out.trace) == 10


def test_scripted_choices():
    p = load_case("ndloop").program
    out = run(p, parse_state("n=6"), Scripted([4, 3]))
    # 4 does not divide 6, then 3 does
    assert isinstance(out, Exited) and out.trace == (0, 0, 1)
    bad = run(p, parse_state("n=6"), Scripted([7]))
    assert isinstance(bad, Fault) and bad.kind == "nd-unsat"


def test_fault_reports_location():
    p = parse_program("entry 0 block 0: x := 1 / y; exit")
    out = run(p, parse_state("y=0"))
    assert isinstance(out, Fault) and out.kind == "div-zero" and out.location == (0, 0)
    out = run(parse_program("entry 0 block 0: ijump 5 block 1: exit"), State.of())
    assert isinstance(out, Fault) and out.kind == "bad-ijump-target"


def test_fuel_counts_blocks():
    p = parse_program("entry 0 block 0: jump 1 1 1 block 1: exit")
    assert isinstance(run(p, State.of(), fuel=2), Exited)
    assert isinstance(run(p, State.of(), fuel=1), OutOfFuel)


def test_nonzero_condition_takes_first_target():
    p = parse_program("entry 0 block 0: jump x 1 2 block 1: y := 1; exit block 2: y := 2; exit")
    assert run(p, parse_state("x=-3")).state.lookup("y") == 1
    assert run(p, parse_state("x=0")).state.lookup("y") == 2


def test_enumerate_runs_covers_all_choices():
    p = parse_program("entry 0 block 0: x <- some (0 <= x && x < 3); exit")
    runs = enumerate_runs(p, State.of(), fuel=2, domain=(-5, 5))
    assert sorted(r.state.lookup("x") for r in runs.exited) == [0, 1, 2]
    assert Exhaustive((0, 3)).choices(lambda w: w != 1) == [0, 2]


def _reference_exits(p, s0, fuel, domain):
    """Depth-first over every choice sequence, independent of the level-sync search."""
    out = set()

    def go(addr, state, left):
        if left == 0:
            return
        block = p.blocks[addr]
        frontier = [state]
        for s in block.stmts:
            nxt = []
            for st_ in frontier:
                if isinstance(s, NDAssign):
                    for w in domain:
                        try:
                            nxt.append(step_stmt(st_, s, Scripted([w])))
                        except EvalFault:
                            pass
                else:
                    try:
                        nxt.append(step_stmt(st_, s))
                    except EvalFault:
                        pass
            frontier = nxt
        for st_ in frontier:
            single = Program(addr, {**p.blocks, addr: Block((), block.term)})
            o = run(single, st_, fuel=1)
            if isinstance(o, Exited):
                out.add(o.state)
            elif isinstance(o, OutOfFuel) and len(o.trace) == 1:
                target = _target(p, block, st_)
                go(target, st_, left - 1)

    go(p.entry, s0, fuel)
    return out


def _target(p, block, state):
    t = block.term
    if isinstance(t, Jump):
        return t.then_addr if eval_expr(state, t.cond) != 0 else t.else_addr
    return eval_expr(state, t.target)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_reachable_exits_agree_with_reference(seed):
    gen = ProgramGenerator(seed)
    p = gen.program()
    domain = (-2, 2)
    for x, y in itertools.product(range(-1, 2), repeat=2):
        s0 = State.of({"x": x, "y": y})
        fast = reachable_exits(p, s0, 6, domain)
        slow = _reference_exits(p, s0, 6, range(*domain))
        assert set(fast.exits) == slow
        assert set(fast.exits) == {r.state for r in enumerate_runs(p, s0, 6, domain).exited}


def test_parse_state():
    s = parse_state("x=4; y=-1, [7]=42")
    assert s.var_dict() == {"x": 4, "y": -1} and s.mem.as_dict() == {7: 42}
    with pytest.raises(ValueError):
        parse_state("x")
