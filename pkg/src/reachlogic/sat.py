"""Tiered satisfiability for predicates.

Tier 1 is the syntactic simplifier, sound for every model.  Tier 2
searches for a model over a bounded domain, so its ``Unsat`` only speaks
for that domain.  Tier 3 hands an SMT-LIB script to an external solver.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Union

from .core import DEFAULT_WIDTH, Expr, Var, conjuncts, substitute
from .interpreter import EvalFault, domain_of, evaluate
from .predicate import DEFAULT_DOMAIN, Model, Predicate, alpha_normal, bound_names, holds, matrix, prefix
from .simplify import is_false, simplify


@dataclass(frozen=True)
class Unsat:
    tier: int = 1


@dataclass(frozen=True)
class Sat:
    model: Model
    tier: int = 2


@dataclass(frozen=True)
class Unknown:
    reason: str = ""


Verdict = Union[Unsat, Sat, Unknown]


@dataclass(frozen=True)
class SatConfig:
    """Which tiers run and how.

    ``bounded_pruning`` lets the search discard nodes that Tier 2 finds
    unsatisfiable over ``domain``; otherwise only Tier-1 contradictions prune.
    """

    tiers: tuple[int, ...] = (1, 2)
    domain: tuple[int, int] = DEFAULT_DOMAIN
    solver: str | None = None
    timeout: float = 5.0
    width: int = DEFAULT_WIDTH
    node_budget: int = 200_000
    bounded_pruning: bool = True

    def __post_init__(self) -> None:
        if 1 not in self.tiers:
            raise ValueError("tier 1 must be enabled")
        if self.domain[0] >= self.domain[1]:
            raise ValueError(f"empty domain {self.domain}")

    def to_json(self) -> dict:
        return {
            "tiers": list(self.tiers),
            "domain": list(self.domain),
            "solver": self.solver,
            "timeout": self.timeout,
            "width": self.width,
            "nodeBudget": self.node_budget,
            "boundedPruning": self.bounded_pruning,
        }


class _Need(Exception):
    def __init__(self, key):
        self.key = key


class _OutOfBudget(Exception):
    pass


def bounded_model(p: Predicate, domain=DEFAULT_DOMAIN, width: int = DEFAULT_WIDTH, node_budget: int = 200_000) -> Verdict:
    """Search a model of ``p`` with every unknown drawn from ``domain``.

    Unknowns are the free variables, the existential witnesses and the
    memory cells the predicate reads.  They are introduced lazily as
    evaluation asks for them, and a branch is abandoned as soon as some
    conjunct is fully determined and false.
    """
    dom = domain_of(domain)
    names = bound_names(p)
    if len(set(names)) != len(names):
        p = alpha_normal(p)
    binders = prefix(p)
    # witnesses get private names so they cannot be confused with free variables
    leaf = matrix(p)
    bounds = []
    witness_names = set()
    for i, (var, bound) in enumerate(binders):
        hidden = f"\x00w{i}"
        witness_names.add(hidden)
        bound = substitute(bound, var, Var(hidden))
        for j in range(i + 1, len(binders)):
            binders[j] = (binders[j][0], substitute(binders[j][1], var, Var(hidden)))
        leaf = substitute(leaf, var, Var(hidden))
        bounds.append(bound)
    constraints: list[Expr] = []
    for b in bounds:
        constraints.extend(conjuncts(b))
    constraints.extend(conjuncts(leaf))

    env: dict[str, int] = {}
    cells: dict[int, int] = {}
    budget = [node_budget]

    def lookup(name: str) -> int:
        try:
            return env[name]
        except KeyError:
            raise _Need(("var", name)) from None

    def read(addr: int) -> int:
        try:
            return cells[addr]
        except KeyError:
            raise _Need(("cell", addr)) from None

    def search() -> bool:
        budget[0] -= 1
        if budget[0] < 0:
            raise _OutOfBudget
        need = None
        for c in constraints:
            try:
                if evaluate(c, lookup, read, width) == 0:
                    return False
            except _Need as n:
                if need is None:
                    need = n.key
            except EvalFault:
                return False
        if need is None:
            return True
        kind, key = need
        store = env if kind == "var" else cells
        for w in dom:
            store[key] = w
            if search():
                return True
        del store[key]
        return False

    try:
        found = search()
    except _OutOfBudget:
        return Unknown("bounded search budget exhausted")
    if not found:
        return Unsat(tier=2)
    model = Model({k: v for k, v in env.items() if k not in witness_names}, dict(cells))
    return Sat(model, tier=2)


def check_sat(p: Predicate, cfg: SatConfig = SatConfig()) -> Verdict:
    return _check_sat_cached(p, cfg)


@functools.lru_cache(maxsize=100_000)
def _check_sat_cached(p: Predicate, cfg: SatConfig) -> Verdict:
    s = simplify(p, cfg.width)
    if is_false(s):
        return Unsat(tier=1)
    verdict: Verdict = Unknown("no tier decided")
    if 2 in cfg.tiers:
        verdict = bounded_model(s, cfg.domain, cfg.width, cfg.node_budget)
        if isinstance(verdict, Sat) and not holds(p, verdict.model, cfg.domain, cfg.width):
            verdict = Unknown("bounded model rejected by holds")
        if not isinstance(verdict, Unknown):
            return verdict
    if 3 in cfg.tiers and cfg.solver:
        from .smtlib import solve

        verdict = solve(s, cfg)
        if isinstance(verdict, Sat) and not holds(p, verdict.model, cfg.domain, cfg.width):
            verdict = Unknown("solver model not confirmed over the bounded domain")
    return verdict


def prunable(p: Predicate, cfg: SatConfig) -> bool:
    """Whether the search may discard a node carrying ``p``.

    Tier-1 contradictions always prune.  Other ``Unsat`` verdicts prune only
    under bounded-domain semantics.
    """
    if is_false(simplify(p, cfg.width)):
        return True
    return cfg.bounded_pruning and isinstance(check_sat(p, cfg), Unsat)
