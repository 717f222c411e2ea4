"""Backward transformers: statements, stores with aliasing case splits, edges."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .core import (
    TRUE,
    Assign,
    BinOp,
    Const,
    Deref,
    Expr,
    IJump,
    Jump,
    NDAssign,
    Not,
    Op,
    Stmt,
    Store,
    Terminator,
    Var,
    conjoin,
)
from .parser import format_expr
from .predicate import Exists, Leaf, NameSupply, Predicate, conj, fresh_exists, subst
from .simplify import simplify


@dataclass(frozen=True)
class CasePredicate:
    """One outcome of a store split: ``pred`` holds before the store when ``constraint`` does."""

    pred: Predicate
    constraint: Expr
    provenance: tuple[str, ...] = ()

    def effective(self) -> Predicate:
        return conj(self.pred, self.constraint)


Keep = Callable[[Expr], bool]


def _expr_cases(addr: Expr, value: Expr, e: Expr, keep: Keep | None = None) -> list[tuple[Expr, Expr, tuple[str, ...]]]:
    if isinstance(e, (Const, Var)):
        return [(e, TRUE, ())]
    if isinstance(e, Deref):
        a2 = e.addr
        sep = BinOp(Op.SEP, addr, a2)
        alias = BinOp(Op.ALIAS, addr, a2)
        return [
            (e, sep, (f"sep({format_expr(addr)}, {format_expr(a2)})",)),
            (value, alias, (f"alias({format_expr(addr)}, {format_expr(a2)})",)),
        ]
    if isinstance(e, Not):
        return [(Not(x), c, tags) for x, c, tags in _expr_cases(addr, value, e.operand, keep)]
    out = []
    rights = _expr_cases(addr, value, e.right, keep)
    for l, c1, t1 in _expr_cases(addr, value, e.left, keep):
        for r, c2, t2 in rights:
            c = conjoin(c1, c2)
            if keep is None or keep(c):
                out.append((BinOp(e.op, l, r), c, t1 + t2))
    return out


def pre_store(addr: Expr, value: Expr, q: Predicate, keep: Keep | None = None) -> list[CasePredicate]:
    """Case analysis for ``[addr] := value`` against postcondition ``q``.

    Every dereference in ``q`` either misses the written cell (``sep``) or
    hits it (``alias``) and then reads ``value``.  The address inside a
    dereference is not itself split.

    ``keep`` may reject a partial constraint early; since constraints only
    grow by conjunction, a rejected partial case can never become feasible.
    """
    if isinstance(q, Leaf):
        return [CasePredicate(Leaf(e), c, t) for e, c, t in _expr_cases(addr, value, q.expr, keep)]
    out = []
    bodies = pre_store(addr, value, q.body, keep)
    for b, c1, t1 in _expr_cases(addr, value, q.bound, keep):
        for body in bodies:
            c = conjoin(c1, body.constraint)
            if keep is None or keep(c):
                out.append(CasePredicate(Exists(q.var, b, body.pred), c, t1 + body.provenance))
    return out


def _dedup(preds: Iterable) -> list:
    seen = set()
    out = []
    for p in preds:
        key = p[0] if isinstance(p, tuple) else p
        if key not in seen:
            seen.add(key)
            out.append(p)
    return out


def tau_stmt_raw(s: Stmt, q: Predicate, names: NameSupply, keep: Keep | None = None) -> list[tuple[Predicate, tuple[str, ...]]]:
    """Unsimplified preconditions of ``q`` across ``s`` with their store case tags."""
    if isinstance(s, Assign):
        return [(subst(q, s.var, s.expr), ())]
    if isinstance(s, NDAssign):
        return [(fresh_exists(s.cond, q, s.var, names), ())]
    if isinstance(s, Store):
        return [(c.effective(), c.provenance) for c in pre_store(s.addr, s.value, q, keep)]
    raise TypeError(f"not a statement: {s!r}")


def tau_stmt_cases(s: Stmt, q: Predicate, names: NameSupply, width: int = 64) -> list[tuple[Predicate, tuple[str, ...]]]:
    """Like :func:`tau_stmt` but keeps the store case tags of each result."""
    return _dedup((simplify(p, width), tags) for p, tags in tau_stmt_raw(s, q, names))


def tau_stmt(s: Stmt, q: Predicate, names: NameSupply | None = None, width: int = 64) -> list[Predicate]:
    """Preconditions of ``q`` across one statement, simplified, in case order."""
    names = names if names is not None else NameSupply()
    return _dedup(p for p, _ in tau_stmt_cases(s, q, names, width))


def tau_edge(term: Terminator, target: int, q: Predicate, polarity: str | None = None) -> Predicate:
    """Precondition for taking the edge from ``term`` to ``target`` and then satisfying ``q``.

    ``polarity`` is ``"then"``, ``"else"`` or ``"ijump"``; it may be omitted
    unless a conditional jump names ``target`` on both sides.
    """
    if isinstance(term, Jump):
        if polarity is None:
            if term.then_addr == term.else_addr == target:
                raise ValueError("both jump targets are equal; pass polarity")
            polarity = "then" if term.then_addr == target else "else"
        if polarity == "then" and term.then_addr == target:
            return conj(q, term.cond)
        if polarity == "else" and term.else_addr == target:
            return conj(q, Not(term.cond))
        raise ValueError(f"block does not jump to {target} on its {polarity} edge")
    if isinstance(term, IJump):
        if polarity not in (None, "ijump"):
            raise ValueError("indirect jumps have no then/else edges")
        return conj(q, BinOp(Op.EQ, term.target, Const(target)))
    raise ValueError("exit has no successors")


def tau_block_stmts_cases(
    stmts: Sequence[Stmt], q: Predicate, names: NameSupply, width: int = 64
) -> list[tuple[Predicate, tuple[str, ...]]]:
    current = [(simplify(q, width), ())]
    for s in reversed(stmts):
        nxt = []
        for p, tags in current:
            for r, t in tau_stmt_cases(s, p, names, width):
                nxt.append((r, t + tags))
        current = _dedup(nxt)
    return current


def tau_block_stmts(stmts: Sequence[Stmt], q: Predicate, names: NameSupply | None = None, width: int = 64) -> list[Predicate]:
    """Right-to-left fold of :func:`tau_stmt` over a statement list."""
    names = names if names is not None else NameSupply()
    return [p for p, _ in tau_block_stmts_cases(stmts, q, names, width)]
