"""JUMP abstract syntax, fixed-width word arithmetic and the memory model.

Words are stored as Python ints normalized to the signed two's-complement
range of the configured width, so ``-1`` prints as ``-1`` rather than
``2**64 - 1``.  Addresses are the same ints; the cast is the identity.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

DEFAULT_WIDTH = 64


class ArithmeticFault(ArithmeticError):
    """Division or modulo by zero."""


class ProgramError(ValueError):
    """A program violates a well-formedness rule."""


def wrap(value: int, width: int = DEFAULT_WIDTH) -> int:
    """Reduce ``value`` modulo ``2**width`` into the signed range."""
    mask = (1 << width) - 1
    value &= mask
    if value >> (width - 1):
        value -= 1 << width
    return value


class Op(str, enum.Enum):
    ADD = "+"
    SUB = "-"
    MUL = "*"
    DIV = "/"
    MOD = "%"
    LT = "<"
    LE = "<="
    EQ = "=="
    NE = "!="
    GT = ">"
    GE = ">="
    AND = "&&"
    OR = "||"
    SEP = "sep"
    ALIAS = "alias"

    def __str__(self) -> str:
        return self.value


COMPARISONS = frozenset({Op.LT, Op.LE, Op.EQ, Op.NE, Op.GT, Op.GE, Op.SEP, Op.ALIAS})
# operators whose result is always 0 or 1
BOOLEAN_OPS = COMPARISONS | {Op.AND, Op.OR}
SYMMETRIC_OPS = frozenset({Op.EQ, Op.NE, Op.SEP, Op.ALIAS})


def word_op(op: Op, a: int, b: int, width: int = DEFAULT_WIDTH) -> int:
    """Apply a binary operator to two words.

    Comparisons are signed and yield 0/1.  ``/`` truncates toward zero and
    ``%`` takes the sign of the dividend (C semantics).  Raises
    :class:`ArithmeticFault` on a zero divisor.
    """
    a = wrap(a, width)
    b = wrap(b, width)
    if op is Op.ADD:
        return wrap(a + b, width)
    if op is Op.SUB:
        return wrap(a - b, width)
    if op is Op.MUL:
        return wrap(a * b, width)
    if op is Op.DIV or op is Op.MOD:
        if b == 0:
            raise ArithmeticFault(f"{op.value} by zero")
        q = abs(a) // abs(b)
        if (a < 0) != (b < 0):
            q = -q
        if op is Op.DIV:
            return wrap(q, width)
        return wrap(a - b * q, width)
    if op is Op.LT:
        return int(a < b)
    if op is Op.LE:
        return int(a <= b)
    if op is Op.GT:
        return int(a > b)
    if op is Op.GE:
        return int(a >= b)
    if op is Op.EQ or op is Op.ALIAS:
        return int(a == b)
    if op is Op.NE or op is Op.SEP:
        return int(a != b)
    if op is Op.AND:
        return int(a != 0 and b != 0)
    if op is Op.OR:
        return int(a != 0 or b != 0)
    raise ValueError(f"unknown operator {op!r}")


# ---------------------------------------------------------------------------
# Expressions


def _cached_hash(self) -> int:
    # composite nodes are hashed constantly (memo tables, dedup); trees are
    # immutable, so the recursive hash is computed once
    try:
        return self.__dict__["_hash"]
    except KeyError:
        h = hash((type(self).__name__,) + tuple(getattr(self, f) for f in self.__dataclass_fields__))
        object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Const:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Deref:
    addr: "Expr"

    __hash__ = _cached_hash


@dataclass(frozen=True)
class BinOp:
    op: Op
    left: "Expr"
    right: "Expr"

    __hash__ = _cached_hash


@dataclass(frozen=True)
class Not:
    operand: "Expr"

    __hash__ = _cached_hash


Expr = Union[Const, Var, Deref, BinOp, Not]

TRUE = Const(1)
FALSE = Const(0)


def subexprs(e: Expr) -> Iterator[Expr]:
    """Pre-order walk over ``e`` and all of its subexpressions."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, BinOp):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Deref):
            stack.append(node.addr)
        elif isinstance(node, Not):
            stack.append(node.operand)


def tree_size(e: Expr, _memo: dict | None = None) -> int:
    """Number of nodes of ``e`` as a tree; shared subterms are visited once."""
    memo = {} if _memo is None else _memo
    key = id(e)
    if key in memo:
        return memo[key]
    if isinstance(e, BinOp):
        n = 1 + tree_size(e.left, memo) + tree_size(e.right, memo)
    elif isinstance(e, Deref):
        n = 1 + tree_size(e.addr, memo)
    elif isinstance(e, Not):
        n = 1 + tree_size(e.operand, memo)
    else:
        n = 1
    memo[key] = n
    return n


def expr_vars(e: Expr) -> frozenset[str]:
    return frozenset(n.name for n in subexprs(e) if isinstance(n, Var))


def substitute(e: Expr, name: str, repl: Expr) -> Expr:
    """Replace every ``Var(name)`` in ``e`` by ``repl``."""
    if isinstance(e, Var):
        return repl if e.name == name else e
    if isinstance(e, Const):
        return e
    if isinstance(e, Deref):
        addr = substitute(e.addr, name, repl)
        return e if addr is e.addr else Deref(addr)
    if isinstance(e, Not):
        inner = substitute(e.operand, name, repl)
        return e if inner is e.operand else Not(inner)
    left = substitute(e.left, name, repl)
    right = substitute(e.right, name, repl)
    if left is e.left and right is e.right:
        return e
    return BinOp(e.op, left, right)


def conjoin(*parts: Expr) -> Expr:
    """Left-nested ``&&`` of ``parts``, skipping literal ``1`` operands."""
    kept = [p for p in parts if p != TRUE]
    if not kept:
        return TRUE
    out = kept[0]
    for p in kept[1:]:
        out = BinOp(Op.AND, out, p)
    return out


def conjuncts(e: Expr) -> list[Expr]:
    """Flatten nested ``&&`` into a list of operands."""
    out = []
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, BinOp) and node.op is Op.AND:
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


# ---------------------------------------------------------------------------
# Statements, blocks, programs


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expr


@dataclass(frozen=True)
class NDAssign:
    """``var <- some cond``: bind ``var`` to any word making ``cond`` non-zero.

    Inside ``cond`` the variable denotes the candidate value.
    """

    var: str
    cond: Expr


@dataclass(frozen=True)
class Store:
    addr: Expr
    value: Expr


Stmt = Union[Assign, NDAssign, Store]


@dataclass(frozen=True)
class Jump:
    cond: Expr
    then_addr: int
    else_addr: int


@dataclass(frozen=True)
class IJump:
    target: Expr


@dataclass(frozen=True)
class Exit:
    pass


Terminator = Union[Jump, IJump, Exit]


@dataclass(frozen=True)
class Block:
    stmts: tuple[Stmt, ...]
    term: Terminator

    def __post_init__(self) -> None:
        if not isinstance(self.stmts, tuple):
            object.__setattr__(self, "stmts", tuple(self.stmts))


@dataclass(frozen=True)
class Program:
    """A program ``(entry, blocks)``; well-formedness is checked on construction."""

    entry: int
    blocks: Mapping[int, Block]

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", dict(sorted(self.blocks.items())))
        if self.entry not in self.blocks:
            raise ProgramError(f"entry {self.entry} is not a block")
        for addr, block in self.blocks.items():
            if isinstance(block.term, Jump):
                for target in (block.term.then_addr, block.term.else_addr):
                    if target not in self.blocks:
                        raise ProgramError(f"block {addr} jumps to undeclared block {target}")

    def __hash__(self) -> int:
        return hash((self.entry, tuple(self.blocks.items())))

    @property
    def exit_blocks(self) -> list[int]:
        return [a for a, b in self.blocks.items() if isinstance(b.term, Exit)]

    def variables(self) -> frozenset[str]:
        """Every variable name mentioned anywhere in the program."""
        names: set[str] = set()
        for block in self.blocks.values():
            for s in block.stmts:
                if isinstance(s, Store):
                    names |= expr_vars(s.addr) | expr_vars(s.value)
                else:
                    names.add(s.var)
                    names |= expr_vars(s.expr if isinstance(s, Assign) else s.cond)
            if isinstance(block.term, Jump):
                names |= expr_vars(block.term.cond)
            elif isinstance(block.term, IJump):
                names |= expr_vars(block.term.target)
        return frozenset(names)


# ---------------------------------------------------------------------------
# Memory and state


@dataclass(frozen=True)
class Memory:
    """Immutable word-addressed memory.

    Cells holding the default value are not stored, so two memories are
    equal exactly when every read agrees.
    """

    cells: tuple[tuple[int, int], ...] = ()
    default: int = 0

    @classmethod
    def of(cls, cells: Mapping[int, int] | None = None, default: int = 0) -> "Memory":
        items = tuple(sorted((a, w) for a, w in (cells or {}).items() if w != default))
        return cls(items, default)

    def as_dict(self) -> dict[int, int]:
        return dict(self.cells)


def mem_read(addr: int, m: Memory) -> int:
    for a, w in m.cells:
        if a == addr:
            return w
    return m.default


def mem_write(addr: int, value: int, m: Memory) -> Memory:
    cells = m.as_dict()
    cells[addr] = value
    return Memory.of(cells, m.default)


@dataclass(frozen=True)
class State:
    mem: Memory = field(default_factory=Memory)
    vars: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(cls, vars: Mapping[str, int] | None = None, mem: Mapping[int, int] | None = None) -> "State":
        return cls(Memory.of(mem), tuple(sorted((vars or {}).items())))

    def lookup(self, name: str) -> int:
        for n, w in self.vars:
            if n == name:
                return w
        raise KeyError(name)

    def bind(self, name: str, value: int) -> "State":
        env = dict(self.vars)
        env[name] = value
        return State(self.mem, tuple(sorted(env.items())))

    def var_dict(self) -> dict[str, int]:
        return dict(self.vars)
