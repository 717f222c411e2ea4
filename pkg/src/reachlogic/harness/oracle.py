"""Brute-force ground truth: which initial states can reach the postcondition."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from ..core import DEFAULT_WIDTH, Assign, Const, Deref, IJump, Jump, NDAssign, Program, State, expr_vars, subexprs
from ..interpreter import domain_of, reachable_exits
from ..predicate import Model, Predicate, derefs, free_vars, holds, matrix, prefix


@dataclass(frozen=True)
class StateSpace:
    """Finite set of initial states: a domain per variable and per memory cell.

    Variables listed in ``fixed`` are bound to that value in every state,
    and cells not mentioned hold 0.
    """

    vars: tuple[tuple[str, tuple[int, ...]], ...]
    cells: tuple[tuple[int, tuple[int, ...]], ...] = ()
    fixed: tuple[tuple[str, int], ...] = ()

    @classmethod
    def of(
        cls,
        vars: Mapping[str, object] | None = None,
        cells: Mapping[int, object] | None = None,
        fixed: Mapping[str, int] | None = None,
    ) -> "StateSpace":
        v = tuple((k, domain_of(d)) for k, d in sorted((vars or {}).items()))
        c = tuple((a, domain_of(d)) for a, d in sorted((cells or {}).items()))
        f = tuple(sorted((fixed or {}).items()))
        return cls(v, c, f)

    def __len__(self) -> int:
        n = 1
        for _, d in self.vars + self.cells:
            n *= len(d)
        return n

    def __iter__(self) -> Iterator[State]:
        names = [k for k, _ in self.vars]
        addrs = [a for a, _ in self.cells]
        doms = [d for _, d in self.vars] + [d for _, d in self.cells]
        for values in itertools.product(*doms):
            env = dict(self.fixed)
            env.update(zip(names, values[: len(names)]))
            yield State.of(env, dict(zip(addrs, values[len(names) :])))

    def to_json(self) -> dict:
        return {
            "vars": {k: [d[0], d[-1] + 1] if _is_range(d) else list(d) for k, d in self.vars},
            "cells": {str(a): [d[0], d[-1] + 1] if _is_range(d) else list(d) for a, d in self.cells},
            "fixed": dict(self.fixed),
        }


def _is_range(d: Sequence[int]) -> bool:
    return len(d) > 1 and list(d) == list(range(d[0], d[-1] + 1))


def _uses(e) -> set[str]:
    return set(expr_vars(e))


def input_variables(p: Program, q: Predicate) -> frozenset[str]:
    """Variables that may be read before they are written (live at entry).

    The postcondition's free variables count as read at every exit.
    """
    use: dict[int, set[str]] = {}
    kill: dict[int, set[str]] = {}
    for addr, block in p.blocks.items():
        u: set[str] = set()
        k: set[str] = set()
        reads = []
        for s in block.stmts:
            if isinstance(s, Assign):
                reads = [(_uses(s.expr), s.var)]
            elif isinstance(s, NDAssign):
                reads = [(_uses(s.cond) - {s.var}, s.var)]
            else:
                reads = [(_uses(s.addr) | _uses(s.value), None)]
            for r, w in reads:
                u |= r - k
                if w is not None:
                    k.add(w)
        t = block.term
        if isinstance(t, Jump):
            u |= _uses(t.cond) - k
        elif isinstance(t, IJump):
            u |= _uses(t.target) - k
        else:
            u |= set(free_vars(q)) - k
        use[addr], kill[addr] = u, k
    live = {a: set() for a in p.blocks}
    changed = True
    while changed:
        changed = False
        for addr, block in p.blocks.items():
            t = block.term
            if isinstance(t, Jump):
                succ = {t.then_addr, t.else_addr}
            elif isinstance(t, IJump):
                succ = set(p.blocks)
            else:
                succ = set()
            out = set().union(*(live[s] for s in succ)) if succ else set()
            new = use[addr] | (out - kill[addr])
            if new != live[addr]:
                live[addr] = new
                changed = True
    return frozenset(live[p.entry])


def touched_constant_cells(p: Program, q: Predicate) -> frozenset[int]:
    """Constant addresses dereferenced or stored anywhere in ``p`` or ``q``."""
    exprs = [matrix(q)] + [b for _, b in prefix(q)]
    for block in p.blocks.values():
        for s in block.stmts:
            if isinstance(s, Assign):
                exprs.append(s.expr)
            elif isinstance(s, NDAssign):
                exprs.append(s.cond)
            else:
                exprs.extend([Deref(s.addr), s.value])
        t = block.term
        exprs.append(t.cond if isinstance(t, Jump) else t.target if isinstance(t, IJump) else None)
    out = set()
    for e in exprs:
        if e is None:
            continue
        for n in subexprs(e):
            if isinstance(n, Deref) and isinstance(n.addr, Const):
                out.add(n.addr.value)
    return frozenset(out)


@dataclass
class OracleResult:
    """Initial states from which some run ends in a state satisfying Q."""

    exploits: dict[State, int] = field(default_factory=dict)  # state -> fewest block edges
    nonterminating: int = 0
    faulting: int = 0

    @property
    def states(self) -> frozenset[State]:
        return frozenset(self.exploits)

    @property
    def max_edges(self) -> int:
        return max(self.exploits.values(), default=0)


def oracle(
    p: Program,
    q: Predicate,
    space: Iterable[State],
    fuel: int,
    domain=(-8, 8),
    width: int = DEFAULT_WIDTH,
) -> OracleResult:
    res = OracleResult()
    for s0 in space:
        reach = reachable_exits(p, s0, fuel, domain, width)
        if not reach.terminated:
            res.nonterminating += 1
        if reach.faults:
            res.faulting += 1
        best = None
        for final, blocks in reach.exits.items():
            if holds(q, Model.from_state(final), domain, width):
                edges = blocks - 1
                best = edges if best is None else min(best, edges)
        if best is not None:
            res.exploits[s0] = best
    return res


def oracle_exploit_set(p: Program, q: Predicate, space: Iterable[State], fuel: int, domain=(-8, 8), width: int = DEFAULT_WIDTH) -> frozenset[State]:
    return oracle(p, q, space, fuel, domain, width).states


def satisfying(pred: Predicate, space: Iterable[State], domain=(-8, 8), width: int = DEFAULT_WIDTH) -> Iterator[State]:
    """Lazily yield the states of ``space`` where ``pred`` holds.

    Truth depends only on the free variables (and memory, when ``pred``
    dereferences), so states agreeing on those share one evaluation.
    """
    names = sorted(free_vars(pred))
    reads_memory = bool(derefs(pred))
    memo: dict = {}
    for s in space:
        m = Model.from_state(s)
        key = (
            tuple((n, m.vars.get(n)) for n in names),
            tuple(sorted(m.cells.items())) if reads_memory else (),
        )
        if key not in memo:
            memo[key] = holds(pred, m, domain, width)
        if memo[key]:
            yield s


def witness_model_union(
    preds: Iterable[Predicate],
    space: Iterable[State],
    domain=(-8, 8),
    width: int = DEFAULT_WIDTH,
) -> frozenset[State]:
    """States of ``space`` satisfying at least one of ``preds``."""
    space = list(space)
    out: set[State] = set()
    for p in preds:
        out.update(satisfying(p, space, domain, width))
    return frozenset(out)


def models_of(pred: Predicate, space: Iterable[State], domain=(-8, 8), width: int = DEFAULT_WIDTH) -> list[State]:
    return list(satisfying(pred, space, domain, width))


@dataclass
class TripleCheck:
    confirmed: bool
    checked: int
    counterexample: State | None = None


def triple_space(p: Program, q: Predicate, pre: Predicate, domain) -> StateSpace:
    """Every assignment of the program's inputs and the precondition's free
    variables over ``domain``; constant cells mentioned anywhere range too."""
    names = set(free_vars(pre)) | set(input_variables(p, q))
    cells = touched_constant_cells(p, pre) | touched_constant_cells(p, q)
    return StateSpace.of({v: domain for v in names}, {a: domain for a in cells})


def check_triple(
    p: Program,
    q: Predicate,
    pre: Predicate,
    domain=(-8, 8),
    fuel: int = 64,
    width: int = DEFAULT_WIDTH,
) -> TripleCheck:
    """Bounded check of a reachability triple: every state satisfying ``pre``
    must have some run ending in a state satisfying ``q``."""
    checked = 0
    for s0 in triple_space(p, q, pre, domain):
        if not holds(pre, Model.from_state(s0), domain, width):
            continue
        checked += 1
        reach = reachable_exits(p, s0, fuel, domain, width)
        if not any(holds(q, Model.from_state(f), domain, width) for f in reach.exits):
            return TripleCheck(False, checked, s0)
    return TripleCheck(True, checked)
