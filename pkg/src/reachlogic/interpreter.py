"""Concrete operational semantics of JUMP.

``run`` follows one execution, resolving ``some`` choices through an
oracle.  ``enumerate_runs`` and ``reachable_exits`` explore every
resolution over a finite candidate domain and are the ground truth the
precondition generator is tested against.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence, Union

from .core import (
    DEFAULT_WIDTH,
    ArithmeticFault,
    Assign,
    BinOp,
    Block,
    Const,
    Deref,
    Exit,
    Expr,
    Jump,
    NDAssign,
    Not,
    Program,
    State,
    Stmt,
    Store,
    Var,
    mem_read,
    mem_write,
    word_op,
    wrap,
)


class EvalFault(Exception):
    """Evaluation got stuck: ``kind`` is ``unbound``, ``div-zero``, ``nd-unsat`` ..."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


def evaluate(
    e: Expr,
    lookup: Callable[[str], int],
    read: Callable[[int], int],
    width: int = DEFAULT_WIDTH,
) -> int:
    """Evaluate ``e`` with pluggable variable lookup and memory read.

    ``lookup`` raises ``KeyError`` for unbound names; callers that want
    lazy model construction can raise their own exception instead.
    """
    if isinstance(e, Const):
        return wrap(e.value, width)
    if isinstance(e, Var):
        try:
            return lookup(e.name)
        except KeyError:
            raise EvalFault("unbound", e.name) from None
    if isinstance(e, BinOp):
        a = evaluate(e.left, lookup, read, width)
        b = evaluate(e.right, lookup, read, width)
        try:
            return word_op(e.op, a, b, width)
        except ArithmeticFault as exc:
            raise EvalFault("div-zero", str(exc)) from None
    if isinstance(e, Not):
        return int(evaluate(e.operand, lookup, read, width) == 0)
    if isinstance(e, Deref):
        return read(evaluate(e.addr, lookup, read, width))
    raise TypeError(f"not an expression: {e!r}")


def eval_expr(state: State, e: Expr, width: int = DEFAULT_WIDTH) -> int:
    env = dict(state.vars)
    return evaluate(e, env.__getitem__, lambda a: mem_read(a, state.mem), width)


# ---------------------------------------------------------------------------
# Choice oracles


class ChoiceOracle:
    """Resolves ``some`` statements.  ``choose`` gets a predicate on candidates."""

    def choose(self, ok: Callable[[int], bool]) -> int:
        raise NotImplementedError


def domain_of(values: range | tuple[int, int] | Sequence[int]) -> tuple[int, ...]:
    """Normalize ``(lo, hi)`` half-open bounds or any int sequence."""
    if isinstance(values, tuple) and len(values) == 2 and not isinstance(values, range):
        return tuple(range(values[0], values[1]))
    return tuple(values)


class SeededRandom(ChoiceOracle):
    def __init__(self, seed: int, domain=(-8, 8)):
        self.rng = random.Random(seed)
        self.domain = domain_of(domain)

    def choose(self, ok):
        candidates = list(self.domain)
        self.rng.shuffle(candidates)
        for w in candidates:
            if ok(w):
                return w
        raise EvalFault("nd-unsat", "no candidate in domain satisfies the condition")


class Scripted(ChoiceOracle):
    def __init__(self, values: Iterable[int]):
        self.values = list(values)
        self.pos = 0

    def choose(self, ok):
        if self.pos >= len(self.values):
            raise EvalFault("nd-exhausted", "scripted choices used up")
        w = self.values[self.pos]
        self.pos += 1
        if not ok(w):
            raise EvalFault("nd-unsat", f"scripted value {w} violates the condition")
        return w


class Exhaustive(ChoiceOracle):
    """Picks the smallest satisfying candidate; ``choices`` lists all of them."""

    def __init__(self, domain=(-8, 8)):
        self.domain = domain_of(domain)

    def choose(self, ok):
        for w in self.domain:
            if ok(w):
                return w
        raise EvalFault("nd-unsat", "no candidate in domain satisfies the condition")

    def choices(self, ok) -> list[int]:
        return [w for w in self.domain if ok(w)]


def _nd_ok(state: State, s: NDAssign, width: int) -> Callable[[int], bool]:
    def ok(w: int) -> bool:
        try:
            return eval_expr(state.bind(s.var, w), s.cond, width) != 0
        except EvalFault:
            return False

    return ok


def step_stmt(state: State, s: Stmt, oracle: ChoiceOracle | None = None, width: int = DEFAULT_WIDTH) -> State:
    if isinstance(s, Assign):
        return state.bind(s.var, eval_expr(state, s.expr, width))
    if isinstance(s, Store):
        addr = eval_expr(state, s.addr, width)
        value = eval_expr(state, s.value, width)
        return State(mem_write(addr, value, state.mem), state.vars)
    if isinstance(s, NDAssign):
        if oracle is None:
            raise EvalFault("nd-unsat", "no choice oracle supplied")
        return state.bind(s.var, oracle.choose(_nd_ok(state, s, width)))
    raise TypeError(f"not a statement: {s!r}")


# ---------------------------------------------------------------------------
# Outcomes


@dataclass(frozen=True)
class Exited:
    state: State
    trace: tuple[int, ...]


@dataclass(frozen=True)
class Fault:
    kind: str
    location: tuple
    trace: tuple[int, ...] = ()


@dataclass(frozen=True)
class OutOfFuel:
    trace: tuple[int, ...] = ()


Outcome = Union[Exited, Fault, OutOfFuel]


def _successor(p: Program, block: Block, state: State, width: int) -> int | None:
    """Next block address, or ``None`` at an exit."""
    term = block.term
    if isinstance(term, Exit):
        return None
    if isinstance(term, Jump):
        return term.then_addr if eval_expr(state, term.cond, width) != 0 else term.else_addr
    target = eval_expr(state, term.target, width)
    if target not in p.blocks:
        raise EvalFault("bad-ijump-target", str(target))
    return target


def run(p: Program, s0: State, oracle: ChoiceOracle | None = None, fuel: int = 1000, width: int = DEFAULT_WIDTH) -> Outcome:
    """Execute ``p`` from ``s0``; each executed block costs one unit of fuel."""
    addr, state, trace = p.entry, s0, []
    while True:
        if fuel <= 0:
            return OutOfFuel(tuple(trace))
        fuel -= 1
        trace.append(addr)
        block = p.blocks[addr]
        for i, s in enumerate(block.stmts):
            try:
                state = step_stmt(state, s, oracle, width)
            except EvalFault as exc:
                return Fault(exc.kind, (addr, i), tuple(trace))
        try:
            nxt = _successor(p, block, state, width)
        except EvalFault as exc:
            return Fault(exc.kind, (addr, "term"), tuple(trace))
        if nxt is None:
            return Exited(state, tuple(trace))
        addr = nxt


def block_outcomes(p: Program, addr: int, state: State, domain: Sequence[int], width: int = DEFAULT_WIDTH) -> Iterator[tuple[str, object, State | None]]:
    """Every way to run one block: ``("exit", None, s)``, ``("goto", a, s)`` or ``("fault", kind, None)``."""
    block = p.blocks[addr]
    states = [state]
    for s in block.stmts:
        nxt: list[State] = []
        for st in states:
            try:
                if isinstance(s, NDAssign):
                    ok = _nd_ok(st, s, width)
                    nxt.extend(st.bind(s.var, w) for w in domain if ok(w))
                else:
                    nxt.append(step_stmt(st, s, None, width))
            except EvalFault as exc:
                yield ("fault", exc.kind, None)
        states = nxt
    for st in states:
        try:
            target = _successor(p, block, st, width)
        except EvalFault as exc:
            yield ("fault", exc.kind, None)
            continue
        if target is None:
            yield ("exit", None, st)
        else:
            yield ("goto", target, st)


@dataclass
class RunSet:
    exited: frozenset[Exited]
    faults: int = 0
    out_of_fuel: int = 0


def enumerate_runs(p: Program, s0: State, fuel: int, domain=(-8, 8), width: int = DEFAULT_WIDTH) -> RunSet:
    """All exited outcomes over every resolution of every ``some`` from ``domain``."""
    domain = domain_of(domain)
    exited: set[Exited] = set()
    faults = out = 0
    frontier = [(p.entry, s0, ())]
    for _ in range(fuel):
        nxt = []
        for addr, state, trace in frontier:
            trace = trace + (addr,)
            for kind, arg, st in block_outcomes(p, addr, state, domain, width):
                if kind == "exit":
                    exited.add(Exited(st, trace))
                elif kind == "goto":
                    nxt.append((arg, st, trace))
                else:
                    faults += 1
        frontier = nxt
        if not frontier:
            break
    out = len(frontier)
    return RunSet(frozenset(exited), faults, out)


@dataclass
class Reach:
    """Final states reachable from one initial state.

    ``exits`` maps each final state to the fewest blocks executed to reach
    it; ``terminated`` is false when some branch was still running at the
    fuel limit.
    """

    exits: dict[State, int] = field(default_factory=dict)
    terminated: bool = True
    faults: int = 0


def reachable_exits(p: Program, s0: State, fuel: int, domain=(-8, 8), width: int = DEFAULT_WIDTH) -> Reach:
    """Level-synchronous exploration with per-level deduplication of configurations.

    Same final states as :func:`enumerate_runs` but without materializing
    traces, which keeps nondeterministic loops tractable.
    """
    domain = domain_of(domain)
    reach = Reach()
    frontier = {(p.entry, s0)}
    blocks = 0
    while frontier and blocks < fuel:
        blocks += 1
        nxt = set()
        for addr, state in sorted(frontier, key=_config_key):
            for kind, arg, st in block_outcomes(p, addr, state, domain, width):
                if kind == "exit":
                    reach.exits.setdefault(st, blocks)
                elif kind == "goto":
                    nxt.add((arg, st))
                else:
                    reach.faults += 1
        frontier = nxt
    reach.terminated = not frontier
    return reach


def _config_key(config):
    addr, state = config
    return (addr, state.vars, state.mem.cells)


def parse_state(text: str) -> State:
    """Parse ``x=4,y=1,[7]=42`` (commas or semicolons) into a state."""
    env: dict[str, int] = {}
    mem: dict[int, int] = {}
    for item in text.replace(";", ",").split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"expected name=value, got {item!r}")
        key = key.strip()
        if key.startswith("[") and key.endswith("]"):
            mem[int(key[1:-1])] = int(value)
        else:
            env[key] = int(value)
    return State.of(env, mem)
