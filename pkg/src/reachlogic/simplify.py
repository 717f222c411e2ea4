"""Syntactic, equivalence-preserving simplification of predicates.

No arithmetic reasoning happens here.  The rules are constant folding,
absorption of constant truth values, rewriting every ordering comparison
into ``<`` plus negation, detection of complementary conjuncts and of
``sep``/``alias`` clashes, and propagation of ``v == c`` equalities through
a conjunction.  Rules that would discard a subterm only fire when that
subterm cannot fault, because a faulting evaluation makes a predicate
false rather than leaving it undefined.
"""
from __future__ import annotations

import functools

from .core import (
    BOOLEAN_OPS,
    FALSE,
    SYMMETRIC_OPS,
    TRUE,
    ArithmeticFault,
    BinOp,
    Const,
    Deref,
    Expr,
    Not,
    Op,
    Var,
    conjoin,
    conjuncts,
    expr_vars,
    subexprs,
    substitute,
    word_op,
    wrap,
)
from .parser import format_expr
from .predicate import FALSE_PRED, Leaf, Predicate, matrix, prefix, rebuild


def may_fault(e: Expr) -> bool:
    for n in subexprs(e):
        if isinstance(n, BinOp) and n.op in (Op.DIV, Op.MOD):
            if not (isinstance(n.right, Const) and n.right.value != 0):
                return True
    return False


def is_boolean(e: Expr) -> bool:
    """True when ``e`` always evaluates to 0 or 1."""
    if isinstance(e, Const):
        return e.value in (0, 1)
    if isinstance(e, Not):
        return True
    return isinstance(e, BinOp) and e.op in BOOLEAN_OPS


@functools.lru_cache(maxsize=65_536)
def _order_key(e: Expr) -> tuple[int, str]:
    return (1 if isinstance(e, Const) else 0, format_expr(e))


def _truth_const(e: Expr) -> bool | None:
    if isinstance(e, Const):
        return e.value != 0
    return None


def _as_value(e: Expr) -> Expr:
    """Turn a truth-context result back into a 0/1 value."""
    if is_boolean(e):
        return e
    if isinstance(e, Const):
        return Const(int(e.value != 0))
    return Not(Not(e))


class Simplifier:
    MEMO_LIMIT = 200_000

    def __init__(self, width: int):
        self.width = width
        # subexpressions repeat heavily after substitution; results only
        # depend on the (immutable) input
        self._memo: dict[tuple[Expr, bool], Expr] = {}

    # -- expressions -------------------------------------------------------

    def expr(self, e: Expr, truth: bool = False) -> Expr:
        """Simplify ``e``; with ``truth`` only its zero/non-zero status is kept."""
        key = (e, truth)
        try:
            return self._memo[key]
        except KeyError:
            pass
        out = self._expr(e, truth)
        if len(self._memo) >= self.MEMO_LIMIT:
            self._memo.clear()
        self._memo[key] = out
        return out

    def _expr(self, e: Expr, truth: bool) -> Expr:
        if isinstance(e, Const):
            if truth:
                return Const(int(e.value != 0))
            return Const(wrap(e.value, self.width))
        if isinstance(e, Var):
            return e
        if isinstance(e, Deref):
            return Deref(self.expr(e.addr))
        if isinstance(e, Not):
            return self.negate(self.expr(e.operand, truth=True), truth)
        if e.op is Op.AND:
            out = self.conjunction([e], top=False)
            return out if truth else _as_value(out)
        if e.op is Op.OR:
            out = self.disjunction([e])
            return out if truth else _as_value(out)
        left = self.expr(e.left)
        right = self.expr(e.right)
        return self.binop(e.op, left, right)

    def negate(self, x: Expr, truth: bool) -> Expr:
        """``!x`` where ``x`` is already simplified in truth context."""
        c = _truth_const(x)
        if c is not None:
            return Const(int(not c))
        if isinstance(x, Not):
            inner = x.operand
            if truth or is_boolean(inner):
                return inner
            return Not(x)
        if isinstance(x, BinOp) and x.op is Op.SEP:
            return BinOp(Op.ALIAS, x.left, x.right)
        if isinstance(x, BinOp) and x.op is Op.ALIAS:
            return BinOp(Op.SEP, x.left, x.right)
        return Not(x)

    def binop(self, op: Op, left: Expr, right: Expr) -> Expr:
        if isinstance(left, Const) and isinstance(right, Const):
            try:
                return Const(word_op(op, left.value, right.value, self.width))
            except ArithmeticFault:
                return BinOp(op, left, right)
        # ordering comparisons become '<' with swaps and negation
        if op is Op.GT:
            return self.binop(Op.LT, right, left)
        if op is Op.GE:
            return self.negate(self.binop(Op.LT, left, right), truth=False)
        if op is Op.LE:
            return self.negate(self.binop(Op.LT, right, left), truth=False)
        if op is Op.NE:
            return self.negate(self.binop(Op.EQ, left, right), truth=False)
        if op in SYMMETRIC_OPS and _order_key(right) < _order_key(left):
            left, right = right, left
        if left == right and not may_fault(left):
            if op in (Op.EQ, Op.ALIAS):
                return TRUE
            if op in (Op.LT, Op.SEP):
                return FALSE
            if op is Op.SUB:
                return Const(0)
        if op is Op.ADD:
            if right == Const(0):
                return left
            if left == Const(0):
                return right
        if op is Op.SUB and right == Const(0):
            return left
        if op is Op.MUL:
            if right == Const(1):
                return left
            if left == Const(1):
                return right
        return BinOp(op, left, right)

    def disjunction(self, parts: list[Expr]) -> Expr:
        flat: list[Expr] = []
        for p in parts:
            if isinstance(p, BinOp) and p.op is Op.OR:
                flat.extend(self._or_operands(p))
            else:
                flat.append(p)
        out: list[Expr] = []
        for p in flat:
            s = self.expr(p, truth=True)
            if isinstance(s, BinOp) and s.op is Op.OR:
                items = self._or_operands(s)
            else:
                items = [s]
            for item in items:
                if item not in out:
                    out.append(item)
        safe = not any(may_fault(x) for x in out)
        if any(_truth_const(x) is True for x in out) and safe:
            return TRUE
        out = [x for x in out if _truth_const(x) is not False]
        if not out:
            return FALSE
        if safe:
            for x in out:
                if self.negate(x, truth=True) in out:
                    return TRUE
        result = out[0]
        for x in out[1:]:
            result = BinOp(Op.OR, result, x)
        return result

    @staticmethod
    def _or_operands(e: Expr) -> list[Expr]:
        if isinstance(e, BinOp) and e.op is Op.OR:
            return Simplifier._or_operands(e.left) + Simplifier._or_operands(e.right)
        return [e]

    def conjunction(self, parts: list[Expr], top: bool) -> Expr:
        """Simplify the conjunction of ``parts`` (truth context).

        ``top`` marks a whole leaf or quantifier bound, where a faulting
        evaluation and falsity are indistinguishable, so collapsing to
        ``0`` is always allowed.
        """
        items = self._conjunct_list(parts)
        if items is None:
            return FALSE if (top or not any(may_fault(p) for p in parts)) else self._rebuild_unsafe(parts)
        if top:
            items = self._propagate(items)
            if items is None:
                return FALSE
        return conjoin(*items) if items else TRUE

    def _rebuild_unsafe(self, parts: list[Expr]) -> Expr:
        # a contradiction was found but a dropped part may fault: keep the shape
        simplified = [self.expr(p, truth=True) for p in parts]
        return conjoin(*simplified) if simplified else TRUE

    def _conjunct_list(self, parts: list[Expr]) -> list[Expr] | None:
        """Flattened, deduplicated conjuncts; ``None`` means contradiction."""
        items: list[Expr] = []
        present: set[Expr] = set()
        # a stack holding the pending conjuncts in reverse order
        queue = [c for p in reversed(parts) for c in reversed(conjuncts(p))]
        while queue:
            p = queue.pop()
            s = self.expr(p, truth=True) if not (isinstance(p, BinOp) and p.op is Op.AND) else p
            if isinstance(s, BinOp) and s.op is Op.AND:
                queue.extend(reversed(conjuncts(s)))
                continue
            # !(a || b) splits into !a && !b
            if isinstance(s, Not) and isinstance(s.operand, BinOp) and s.operand.op is Op.OR:
                queue.extend(Not(x) for x in reversed(self._or_operands(s.operand)))
                continue
            c = _truth_const(s)
            if c is True:
                continue
            if c is False:
                return None
            if s not in present:
                present.add(s)
                items.append(s)
        for s in items:
            if self.negate(s, truth=True) in present:
                return None
            if isinstance(s, BinOp) and s.op is Op.SEP and BinOp(Op.ALIAS, s.left, s.right) in present:
                return None
        return items

    def _propagate(self, items: list[Expr]) -> list[Expr] | None:
        """Substitute ``v == c`` facts into the other conjuncts until stable."""
        done: set[str] = set()
        while True:
            fact = None
            for s in items:
                if (
                    isinstance(s, BinOp)
                    and s.op is Op.EQ
                    and isinstance(s.left, Var)
                    and isinstance(s.right, Const)
                    and s.left.name not in done
                ):
                    fact = s
                    break
            if fact is None:
                return items
            name = fact.left.name
            done.add(name)
            rewritten = [fact]
            for s in items:
                if s is fact:
                    continue
                if name in expr_vars(s):
                    s = substitute(s, name, fact.right)
                rewritten.append(s)
            items = self._conjunct_list(rewritten)
            if items is None:
                return None
            items = [fact] + [s for s in items if s != fact]

    # -- predicates --------------------------------------------------------

    def predicate(self, p: Predicate) -> Predicate:
        binders = prefix(p)
        names = [v for v, _ in binders]
        unique = len(set(names)) == len(names)
        leaf = self.conjunction([matrix(p)], top=True)
        if leaf == FALSE:
            return FALSE_PRED
        if unique:
            facts = [
                s
                for s in conjuncts(leaf)
                if isinstance(s, BinOp) and s.op is Op.EQ and isinstance(s.left, Var) and isinstance(s.right, Const)
            ]
        else:
            facts = []
        out = []
        for var, bound in binders:
            for f in facts:
                bound = substitute(bound, f.left.name, f.right)
            b = self.conjunction([bound], top=True)
            if b == FALSE:
                return FALSE_PRED
            out.append((var, b))
        # drop quantifiers that constrain nothing
        kept = []
        for i, (var, b) in enumerate(out):
            used = var in expr_vars(leaf) or any(var in expr_vars(ob) for j, (_, ob) in enumerate(out) if j != i)
            if b == TRUE and not used:
                continue
            kept.append((var, b))
        return rebuild(kept, leaf)


@functools.lru_cache(maxsize=None)
def _simplifier(width: int) -> Simplifier:
    return Simplifier(width)


def simplify(p: Predicate, width: int = 64) -> Predicate:
    return _simplifier(width).predicate(p)


def simplify_expr(e: Expr, width: int = 64, truth: bool = False) -> Expr:
    s = _simplifier(width)
    if truth:
        return s.conjunction([e], top=True)
    return s.expr(e)


def is_false(p: Predicate) -> bool:
    return isinstance(p, Leaf) and isinstance(p.expr, Const) and p.expr.value == 0
