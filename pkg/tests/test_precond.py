import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reachlogic.core import BinOp, Const, Deref, Exit, IJump, Jump, NDAssign, Op, State, Store, Var, subexprs
from reachlogic.interpreter import EvalFault, Scripted, step_stmt
from reachlogic.parser import format_expr, format_predicate, parse_expr, parse_predicate, parse_program
from reachlogic.precond import pre_store, tau_block_stmts, tau_edge, tau_stmt, tau_stmt_cases
from reachlogic.predicate import Exists, Leaf, Model, NameSupply, bound_names, holds
from reachlogic.simplify import simplify

from strategies import ALL_OPS, CMP, SMALL, VARS, models, statements

DOM = (-4, 4)


def flat_exprs(vars=VARS, ops=ALL_OPS, max_leaves=6):
    """Expressions whose dereferences have a variable or constant address."""
    atom = st.one_of(SMALL.map(Const), st.sampled_from(vars).map(Var))
    leaves = st.one_of(atom, atom.map(Deref))

    def extend(children):
        return st.one_of(st.builds(BinOp, st.sampled_from(ops), children, children))

    return st.recursive(leaves, extend, max_leaves=max_leaves)


@st.composite
def flat_predicates(draw):
    if draw(st.booleans()):
        return Leaf(draw(flat_exprs()))
    body = Leaf(draw(flat_exprs(VARS + ("w",))))
    return Exists("w", draw(flat_exprs(VARS + ("w",), ops=CMP + [Op.AND], max_leaves=3)), body)


def _post_states(s, m: Model):
    """Every state reachable by one step of ``s``; faults reach nothing."""
    state = State.of(m.vars, m.cells)
    choices = [None] if not isinstance(s, NDAssign) else list(range(*DOM))
    out = []
    for w in choices:
        try:
            out.append(step_stmt(state, s, None if w is None else Scripted([w])))
        except EvalFault:
            pass
    return out


def _reaches(s, m, q) -> bool:
    return any(holds(q, Model.from_state(t), DOM) for t in _post_states(s, m))


MODELS = models(cells=(-2, -1, 0, 1, 2), values=st.integers(-2, 2))


@given(statements(), flat_predicates(), MODELS)
def test_statement_soundness(s, q, m):
    for p in tau_stmt(s, q):
        if holds(p, m, DOM):
            assert _reaches(s, m, q), (format_predicate(p), m)


@given(statements(), flat_predicates(), MODELS)
def test_statement_exactness(s, q, m):
    # over flat postconditions the case set loses nothing either
    pre = any(holds(p, m, DOM) for p in tau_stmt(s, q))
    assert pre == _reaches(s, m, q)


@given(st.sampled_from(VARS + ("0", "1")), flat_predicates())
def test_store_cases_are_exhaustive(a, q):
    addr = parse_expr(a)
    cases = pre_store(addr, Var("v"), q)
    # constraints may mention the bound name when a split happens under it
    names = ["v", "w", "x", "y", "z"]
    for values in itertools.product(range(-1, 2), repeat=len(names)):
        env = dict(zip(names, values))
        hits = [c for c in cases if holds(Leaf(c.constraint), Model(env), DOM)]
        assert hits


@given(st.sampled_from(VARS), flat_predicates())
def test_provenance_counts_splits(a, q):
    n_derefs = sum(isinstance(n, Deref) for e in _exprs(q) for n in subexprs(e))
    for c in pre_store(Var(a), Const(0), q):
        assert len(c.provenance) == n_derefs


def _exprs(q):
    while isinstance(q, Exists):
        yield q.bound
        q = q.body
    yield q.expr


def test_fresh_names_never_repeat():
    names = NameSupply()
    q = parse_predicate("x == y")
    s = NDAssign("x", parse_expr("x < 3"))
    p1 = tau_stmt(s, q, names)[0]
    p2 = tau_stmt(NDAssign("y", parse_expr("y < 3")), p1, names)[0]
    assert bound_names(p2) == ["$2", "$1"]


# ---------------------------------------------------------------------------
# examples


def test_assign_example():
    assert tau_stmt(parse_program("entry 0 block 0: v := w; exit").blocks[0].stmts[0], parse_predicate("v > 42")) == [
        parse_predicate("42 < w")
    ]
    # the computed precondition is implied by w == 100
    assert holds(parse_predicate("42 < w"), Model({"w": 100}))


def test_ndassign_example():
    s = NDAssign("d", parse_expr("1 < d && d < n"))
    (p,) = tau_stmt(s, parse_predicate("n % d == 0"))
    assert format_predicate(p) == "E $1 in (1 < $1 && $1 < n) . n % $1 == 0"


def test_store_example():
    s = Store(Var("a1"), Var("v"))
    got = {format_predicate(p) for p in tau_stmt(s, parse_predicate("[a2] == 42"))}
    assert got == {"[a2] == 42 && sep(a1, a2)", "v == 42 && alias(a1, a2)"}


def test_pre_store_rules():
    (c,) = pre_store(Var("a"), Var("v"), Leaf(Const(42)))
    assert c.pred == Leaf(Const(42)) and c.constraint == Const(1)
    cases = pre_store(Var("a1"), Var("v"), Leaf(Deref(Var("a2"))))
    assert [(format_predicate(c.pred), format_expr(c.constraint)) for c in cases] == [
        ("[a2]", "sep(a1, a2)"),
        ("v", "alias(a1, a2)"),
    ]
    cases = pre_store(Var("b"), Deref(Var("a")), parse_predicate("[e] == z"))
    assert [(format_predicate(c.pred), format_expr(c.constraint)) for c in cases] == [
        ("[e] == z", "sep(b, e)"),
        ("[a] == z", "alias(b, e)"),
    ]
    # negation maps over cases; quantifier bounds are split too
    cases = pre_store(Var("a"), Const(1), parse_predicate("E i in [i] > 0 . !([b] == i)"))
    assert len(cases) == 4
    assert all(c.provenance for c in cases)


def test_nested_dereference_is_not_split():
    # the address [y] inside [[y]] is read before the store; when the store
    # hits y itself the sep case keeps a stale address
    s = Store(Var("y"), Const(5))
    q = parse_predicate("[[y]] == 1")
    m = Model({"y": 0}, {0: 7, 7: 1})
    admitted = [p for p in tau_stmt(s, q) if holds(p, m)]
    assert admitted and not _reaches(s, m, q)


def test_edges():
    jump = Jump(parse_expr("x < y"), 3, 1)
    q = parse_predicate("x >= y")
    assert tau_edge(jump, 3, q) == Leaf(BinOp(Op.AND, parse_expr("x >= y"), parse_expr("x < y")))
    assert format_predicate(simplify(tau_edge(jump, 3, q))) == "0"
    assert tau_edge(jump, 1, q) == parse_predicate("x >= y && !(x < y)")
    assert tau_edge(IJump(Var("x")), 2, Leaf(Var("q"))) == parse_predicate("q && x == 2")
    same = Jump(Var("c"), 4, 4)
    assert tau_edge(same, 4, Leaf(Var("q")), "then") == parse_predicate("q && c")
    assert tau_edge(same, 4, Leaf(Var("q")), "else") == parse_predicate("q && !c")


def test_edge_conjunct_goes_inside_prefix():
    q = parse_predicate("E $1 in $1 < 3 . $1 == x")
    assert tau_edge(Jump(Var("c"), 1, 2), 1, q) == parse_predicate("E $1 in $1 < 3 . $1 == x && c")


@pytest.mark.parametrize(
    "term, target, polarity",
    [(Jump(Var("c"), 1, 2), 3, None), (Jump(Var("c"), 1, 1), 1, None), (Exit(), 0, None), (IJump(Var("x")), 1, "then")],
)
def test_illegal_edges(term, target, polarity):
    with pytest.raises(ValueError):
        tau_edge(term, target, Leaf(Const(1)), polarity)


def test_block_fold_examples():
    b = parse_program("entry 0 block 0: y := 0; exit").blocks[0]
    assert tau_block_stmts(b.stmts, parse_predicate("y > 0")) == [Leaf(Const(0))]
    b = parse_program("entry 0 block 0: i := 1; x := x - y; exit").blocks[0]
    assert tau_block_stmts(b.stmts, parse_predicate("x >= y")) == [parse_predicate("!(x - y < y)")]
    b = parse_program("entry 0 block 0: [b] := [a]; [d] := [c]; exit").blocks[0]
    assert len(tau_block_stmts(b.stmts, parse_predicate("[e] == z"))) == 4


def test_cases_keep_tags():
    s = Store(Var("a"), Const(0))
    tags = [t for _, t in tau_stmt_cases(s, parse_predicate("[b] == 1"), NameSupply())]
    assert tags == [("sep(a, b)",), ("alias(a, b)",)]
