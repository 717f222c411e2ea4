"""Predicates: expressions under a prefix of bounded existential quantifiers."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

from .core import DEFAULT_WIDTH, Const, Expr, Var, conjoin, conjuncts, expr_vars, subexprs, substitute, tree_size
from .interpreter import EvalFault, domain_of, evaluate

BOUND_PREFIX = "$"
DEFAULT_DOMAIN = (-8, 8)


@dataclass(frozen=True)
class Leaf:
    expr: Expr


@dataclass(frozen=True)
class Exists:
    """``E var in bound . body``: some word makes both ``bound`` and ``body`` true."""

    var: str
    bound: Expr
    body: "Predicate"


Predicate = Union[Leaf, Exists]

TRUE_PRED = Leaf(Const(1))
FALSE_PRED = Leaf(Const(0))


class NameSupply:
    """Hands out ``$1, $2, ...``; one supply per exploration keeps runs reproducible."""

    def __init__(self, start: int = 1):
        self.next_index = start

    def fresh(self) -> str:
        name = f"{BOUND_PREFIX}{self.next_index}"
        self.next_index += 1
        return name

    def reserve(self, names: Iterable[str]) -> None:
        """Skip past any ``$k`` already in use."""
        for n in names:
            m = re.fullmatch(r"\$(\d+)", n)
            if m:
                self.next_index = max(self.next_index, int(m.group(1)) + 1)


def matrix(p: Predicate) -> Expr:
    while isinstance(p, Exists):
        p = p.body
    return p.expr


def prefix(p: Predicate) -> list[tuple[str, Expr]]:
    out = []
    while isinstance(p, Exists):
        out.append((p.var, p.bound))
        p = p.body
    return out


def rebuild(binders: Sequence[tuple[str, Expr]], leaf: Expr) -> Predicate:
    out: Predicate = Leaf(leaf)
    for var, bound in reversed(binders):
        out = Exists(var, bound, out)
    return out


def bound_names(p: Predicate) -> list[str]:
    return [v for v, _ in prefix(p)]


def pred_size(p: Predicate) -> int:
    memo: dict = {}
    return sum(tree_size(b, memo) for _, b in prefix(p)) + tree_size(matrix(p), memo)


def free_vars(p: Predicate) -> frozenset[str]:
    if isinstance(p, Leaf):
        return expr_vars(p.expr)
    return ((expr_vars(p.bound) | free_vars(p.body)) - {p.var})


def all_vars(p: Predicate) -> frozenset[str]:
    names = set(expr_vars(matrix(p)))
    for v, b in prefix(p):
        names.add(v)
        names |= expr_vars(b)
    return frozenset(names)


def conj(p: Predicate, e: Expr) -> Predicate:
    """``p && e`` with ``e`` placed inside the quantifier prefix.

    Callers guarantee that ``e`` mentions no bound name except ones that
    ``p`` itself binds (fresh names are globally unique), so moving it under
    the binders never captures anything it should not.
    """
    if isinstance(p, Exists):
        return Exists(p.var, p.bound, conj(p.body, e))
    return Leaf(conjoin(p.expr, e))


def map_exprs(p: Predicate, fn: Callable[[Expr], Expr]) -> Predicate:
    if isinstance(p, Leaf):
        return Leaf(fn(p.expr))
    return Exists(p.var, fn(p.bound), map_exprs(p.body, fn))


def subst(p: Predicate, v: str, e: Expr) -> Predicate:
    """Replace free ``v`` by ``e``.

    A binder for ``v`` shadows it.  Bound names colliding with variables of
    ``e`` are renamed first so nothing is captured.
    """
    if isinstance(p, Leaf):
        return Leaf(substitute(p.expr, v, e))
    if p.var == v:
        return Exists(p.var, p.bound, p.body)
    if p.var in expr_vars(e):
        taken = all_vars(p) | expr_vars(e)
        new = _unused_name(p.var, taken)
        p = Exists(new, substitute(p.bound, p.var, Var(new)), subst(p.body, p.var, Var(new)))
    return Exists(p.var, substitute(p.bound, v, e), subst(p.body, v, e))


def _unused_name(base: str, taken: frozenset[str]) -> str:
    k = 1
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def fresh_exists(bound: Expr, q: Predicate, v: str, names: NameSupply) -> Predicate:
    """Quantify ``v`` away: ``E $k in bound[v:=$k] . q[v:=$k]``."""
    k = names.fresh()
    return Exists(k, substitute(bound, v, Var(k)), subst(q, v, Var(k)))


def freshen(p: Predicate, names: NameSupply) -> Predicate:
    """Rename every binder of ``p`` to a fresh ``$k``."""
    if isinstance(p, Leaf):
        return p
    k = names.fresh()
    body = subst(p.body, p.var, Var(k))
    return Exists(k, substitute(p.bound, p.var, Var(k)), freshen(body, names))


def alpha_normal(p: Predicate) -> Predicate:
    """Rename binders to ``$1, $2, ...`` in prefix order, for comparisons."""
    binders = [list(b) for b in prefix(p)]
    leaf = matrix(p)
    temps = [f"\x00{i}" for i in range(len(binders))]
    for i, tmp in enumerate(temps):
        old = binders[i][0]
        binders[i][0] = tmp
        shadowed = False
        for j in range(i, len(binders)):
            if j > i and binders[j][0] == old:
                shadowed = True
                break
            binders[j][1] = substitute(binders[j][1], old, Var(tmp))
        if not shadowed:
            leaf = substitute(leaf, old, Var(tmp))
    for i, tmp in enumerate(temps):
        final = Var(f"{BOUND_PREFIX}{i + 1}")
        for b in binders:
            b[1] = substitute(b[1], tmp, final)
        binders[i][0] = final.name
        leaf = substitute(leaf, tmp, final)
    return rebuild([tuple(b) for b in binders], leaf)


# ---------------------------------------------------------------------------
# Models and bounded truth


@dataclass(frozen=True)
class Model:
    """Initial variable values plus the memory cells a predicate reads."""

    vars: Mapping[str, int] = field(default_factory=dict)
    cells: Mapping[int, int] = field(default_factory=dict)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.vars.items())), tuple(sorted(self.cells.items()))))

    def to_json(self) -> dict:
        out = {k: v for k, v in sorted(self.vars.items())}
        out.update({f"[{a}]": w for a, w in sorted(self.cells.items())})
        return out

    def __str__(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.to_json().items())

    @classmethod
    def from_state(cls, state) -> "Model":
        return cls(state.var_dict(), state.mem.as_dict())


def parse_model(text: str) -> Model:
    """Parse ``x=1;[4]=2`` (commas also accepted)."""
    env: dict[str, int] = {}
    cells: dict[int, int] = {}
    for item in text.replace(",", ";").split(";"):
        item = item.strip()
        if not item:
            continue
        key, _, value = item.partition("=")
        key = key.strip()
        if key.startswith("["):
            cells[int(key.strip("[]"))] = int(value)
        else:
            env[key] = int(value)
    return Model(env, cells)


def holds(p: Predicate, model: Model, domain=DEFAULT_DOMAIN, width: int = DEFAULT_WIDTH, faults: list | None = None) -> bool:
    """Bounded truth of ``p`` in ``model``; existential witnesses range over ``domain``.

    An evaluation fault makes the affected leaf (or witness) false; the
    fault is appended to ``faults`` when a list is passed.
    """
    names = bound_names(p)
    if len(set(names)) != len(names):
        p = alpha_normal(p)
        names = bound_names(p)
    dom = domain_of(domain)
    cells = model.cells
    binders = prefix(p)
    # each matrix conjunct is tested as soon as the binders it mentions are set;
    # a false or faulting conjunct already makes the whole matrix false
    level = {n: i for i, n in enumerate(names)}
    checks: list[list[Expr]] = [[] for _ in range(len(binders) + 1)]
    for c in conjuncts(matrix(p)):
        used = [level[v] for v in expr_vars(c) if v in level]
        checks[max(used) + 1 if used else 0].append(c)

    def read(a: int) -> int:
        return cells.get(a, 0)

    def ok(exprs: list[Expr], env: dict[str, int]) -> bool:
        for e in exprs:
            try:
                if evaluate(e, env.__getitem__, read, width) == 0:
                    return False
            except EvalFault as exc:
                if faults is not None:
                    faults.append(exc)
                return False
        return True

    def check(i: int, env: dict[str, int]) -> bool:
        if i == len(binders):
            return True
        var, bound = binders[i]
        saved, had = env.get(var), var in env
        try:
            for w in dom:
                env[var] = w
                if ok([bound], env) and ok(checks[i + 1], env) and check(i + 1, env):
                    return True
            return False
        finally:
            if had:
                env[var] = saved
            else:
                env.pop(var, None)

    env = dict(model.vars)
    return ok(checks[0], env) and check(0, env)


def derefs(p: Predicate) -> list[Expr]:
    """Deref subexpressions in the bounds and matrix, in order of appearance."""
    from .core import Deref

    exprs = [b for _, b in prefix(p)] + [matrix(p)]
    return [n for e in exprs for n in subexprs(e) if isinstance(n, Deref)]
