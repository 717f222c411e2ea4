"""Small random programs for the randomized oracle suites.

Programs have at most four blocks of at most three statements each, use
no indirect jumps and no division, and may loop.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from ..core import Assign, BinOp, Block, Const, Deref, Exit, Expr, Jump, NDAssign, Not, Op, Program, Store, Var
from ..predicate import Leaf, Predicate

VARS = ("x", "y")
CELLS = (0, 1)

_ARITH = (Op.ADD, Op.SUB, Op.MUL)
_CMP = (Op.LT, Op.LE, Op.EQ, Op.NE, Op.GT, Op.GE)


@dataclass(frozen=True)
class GenOptions:
    max_blocks: int = 4
    max_stmts: int = 3
    memory: bool = True
    variable_addresses: bool = True  # off keeps every dereference at a constant address


class ProgramGenerator:
    def __init__(self, seed: int, options: GenOptions = GenOptions()):
        self.rng = random.Random(seed)
        self.opt = options

    def address(self) -> Expr:
        if self.opt.variable_addresses and self.rng.random() < 0.4:
            return Var(self.rng.choice(VARS))
        return Const(self.rng.choice(CELLS))

    def atom(self) -> Expr:
        r = self.rng.random()
        if r < 0.55:
            return Var(self.rng.choice(VARS))
        if r < 0.85 or not self.opt.memory:
            return Const(self.rng.randrange(-2, 3))
        return Deref(self.address())

    def arith(self, depth: int = 2) -> Expr:
        if depth == 0 or self.rng.random() < 0.45:
            return self.atom()
        return BinOp(self.rng.choice(_ARITH), self.arith(depth - 1), self.arith(depth - 1))

    def cond(self) -> Expr:
        c = BinOp(self.rng.choice(_CMP), self.arith(1), self.arith(1))
        r = self.rng.random()
        if r < 0.15:
            return Not(c)
        if r < 0.3:
            return BinOp(self.rng.choice((Op.AND, Op.OR)), c, BinOp(self.rng.choice(_CMP), self.arith(1), self.arith(1)))
        return c

    def stmt(self):
        r = self.rng.random()
        v = self.rng.choice(VARS)
        if r < 0.15:
            # keep the choice set small and usually non-empty
            lo = self.arith(1)
            return NDAssign(v, BinOp(Op.AND, BinOp(Op.LE, lo, Var(v)), BinOp(Op.LT, Var(v), BinOp(Op.ADD, lo, Const(2)))))
        if r < 0.3 and self.opt.memory:
            return Store(self.address(), self.arith(1))
        return Assign(v, self.arith())

    def program(self) -> Program:
        n = self.rng.randint(1, self.opt.max_blocks)
        blocks = {}
        exit_at = self.rng.randrange(n)
        for a in range(n):
            stmts = tuple(self.stmt() for _ in range(self.rng.randint(0, self.opt.max_stmts)))
            if a == exit_at or (a == n - 1 and self.rng.random() < 0.5):
                term = Exit()
            else:
                term = Jump(self.cond(), self.rng.randrange(n), self.rng.randrange(n))
            blocks[a] = Block(stmts, term)
        return Program(0, blocks)

    def post(self) -> Predicate:
        return Leaf(BinOp(self.rng.choice(_CMP), self.arith(1), self.arith(1)))


def random_cases(seed: int, count: int, options: GenOptions = GenOptions()):
    """Yield ``count`` (program, postcondition) pairs, deterministic in ``seed``."""
    gen = ProgramGenerator(seed, options)
    for _ in range(count):
        yield gen.program(), gen.post()
