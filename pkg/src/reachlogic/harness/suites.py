"""Executable checks: litmus expectations, soundness and completeness against
the brute-force oracle, the quicksort study and the memory axioms."""
from __future__ import annotations

import contextlib
import itertools
import random
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

from .. import precond
from ..core import Block, Deref, IJump, Jump, Memory, Not, Program, State, Store, conjuncts, mem_read, mem_write, subexprs
from ..parser import format_expr, format_predicate, parse_expr, parse_predicate, print_program
from ..predicate import Model, Predicate, alpha_normal, holds, matrix
from ..sat import Sat, SatConfig, Unsat, check_sat
from ..search import Limits, Witness, explore
from ..simplify import simplify, simplify_expr
from .corpus import LITMUS, CorpusCase, load_case, load_corpus
from .oracle import StateSpace, check_triple, input_variables, models_of, oracle, satisfying, witness_model_union
from .randprog import CELLS, VARS, GenOptions, random_cases


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    elapsed: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail} ({self.elapsed:.2f}s)"


@dataclass
class Violation:
    program: str
    post: str
    witness: str
    state: dict

    def __str__(self) -> str:
        return f"witness {self.witness} admits {self.state} which cannot reach {self.post} in\n{self.program}"


@dataclass
class SuiteReport:
    name: str
    checked: int = 0
    skipped: dict[str, int] = field(default_factory=dict)
    violations: list[Violation] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations and all(c.passed for c in self.checks)

    def skip(self, reason: str) -> None:
        self.skipped[reason] = self.skipped.get(reason, 0) + 1

    def to_json(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "skipped": dict(sorted(self.skipped.items())),
            "violations": [str(v) for v in self.violations],
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks],
        }


def _state_json(s: State) -> dict:
    return Model.from_state(s).to_json()


def conjunct_set(p: Predicate) -> frozenset:
    """Normalized conjuncts of a quantifier-free predicate, for order-free comparison."""
    return frozenset(conjuncts(matrix(simplify(p))))


# ---------------------------------------------------------------------------
# Litmus cases


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> Check:
    t0 = time.perf_counter()
    ok, detail = fn()
    return Check(name, ok, detail, time.perf_counter() - t0)


def check_doublestore(case: CorpusCase | None = None) -> Check:
    case = case or load_case("doublestore")

    def body():
        ws, _ = explore(case.program, case.post, case.limits, case.sat_config)
        want = [frozenset(simplify_expr(parse_expr(t), truth=True) for t in group) for group in case.expect["expected"]["conjunctSets"]]
        got = [conjunct_set(w.precondition) for w in ws]
        ok = len(ws) == case.expect["expected"]["witnessCount"] and sorted(map(sorted_str, got)) == sorted(map(sorted_str, want))
        return ok, f"{len(ws)} witnesses; " + " | ".join(format_predicate(w.precondition) for w in ws)

    return _timed("doublestore", body)


def sorted_str(s: Iterable) -> tuple[str, ...]:
    return tuple(sorted(format_expr(e) for e in s))


def check_division(case: CorpusCase | None = None) -> Check:
    case = case or load_case("division")
    exp = case.expect["expected"]

    def body():
        cfg = case.sat_config
        ws, _ = explore(case.program, case.post, case.limits, cfg)
        sat = [w for w in ws if w.satisfiable]
        space = list(case.space)
        union = witness_model_union([w.precondition for w in sat], space, cfg.domain)
        orc = oracle(case.program, case.post, space, case.fuel, cfg.domain)
        limited = frozenset(s for s, k in orc.exploits.items() if k <= exp["maxEdges"])
        equal = union == limited
        target = conjunct_set(parse_predicate(exp["witness"]))
        found = [w for w in ws if conjunct_set(w.precondition) == target]
        model = Model(exp["witnessModel"])
        model_ok = bool(found) and isinstance(check_sat(found[0].precondition, cfg), Sat) and holds(found[0].precondition, model, cfg.domain)
        triple = check_triple(case.program, case.post, parse_predicate(exp["witness"]), cfg.domain, case.fuel)
        ok = equal and model_ok and triple.confirmed
        detail = (
            f"union {len(union)} vs oracle(<= {exp['maxEdges']} edges) {len(limited)}; "
            f"top-right witness found={bool(found)} model ok={model_ok}; triple confirmed on {triple.checked} states"
        )
        return ok, detail

    return _timed("division", body)


def check_ndloop(case: CorpusCase | None = None) -> Check:
    case = case or load_case("ndloop")
    exp = case.expect["expected"]

    def body():
        cfg = case.sat_config
        ws, _ = explore(case.program, case.post, case.limits, cfg)
        depth1 = [w for w in ws if w.depth == 1]
        want = alpha_normal(simplify(parse_predicate(exp["depth1"])))
        shape = len(depth1) == 1 and alpha_normal(depth1[0].precondition) == want
        verdict = check_sat(depth1[0].precondition, cfg) if depth1 else None
        composite = isinstance(verdict, Sat) and verdict.model.vars.get("n") in exp["composite"]
        primes_false = bool(depth1) and not any(holds(depth1[0].precondition, Model({"n": n}), cfg.domain) for n in exp["prime"])
        ok = shape and composite and primes_false
        text = format_predicate(depth1[0].precondition) if depth1 else "-"
        return ok, f"depth-1 witness {text}; model {verdict.model if isinstance(verdict, Sat) else verdict}; primes rejected={primes_false}"

    return _timed("ndloop", body)


def check_indirect(case: CorpusCase | None = None) -> Check:
    case = case or load_case("indirect")

    def body():
        cfg = case.sat_config
        ws, _ = explore(case.program, case.post, case.limits, cfg)
        sat = [w for w in ws if w.satisfiable]
        space = list(case.space)
        models = [frozenset(models_of(w.precondition, space, cfg.domain)) for w in sat]
        want = frozenset(State.of(m) for m in case.expect["expected"]["models"])
        orc = oracle(case.program, case.post, space, case.fuel, cfg.domain).states
        ok = len(sat) == case.expect["expected"]["satisfiableWitnesses"] and models == [want] and orc == want
        shown = [sorted(_state_json(s)["x"] for s in m) for m in models]
        return ok, f"{len(sat)} satisfiable witness(es) with x in {shown}; oracle {sorted(_state_json(s)['x'] for s in orc)}"

    return _timed("indirect", body)


LITMUS_CHECKS = {
    "doublestore": check_doublestore,
    "division": check_division,
    "ndloop": check_ndloop,
    "indirect": check_indirect,
}


def litmus_suite() -> SuiteReport:
    t0 = time.perf_counter()
    rep = SuiteReport("litmus")
    for name in LITMUS:
        rep.checks.append(LITMUS_CHECKS[name]())
        rep.checked += 1
    rep.elapsed = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Soundness and completeness


def _random_space(p: Program, q: Predicate, domain, memory: bool) -> StateSpace:
    inputs = input_variables(p, q)
    fixed = {v: 0 for v in VARS if v not in inputs}
    cells = {a: (0, 2) for a in CELLS} if memory and _touches_memory(p, q) else {}
    return StateSpace.of({v: domain for v in sorted(inputs)}, cells, fixed)


def _touches_memory(p: Program, q: Predicate) -> bool:
    exprs = [matrix(q)]
    for b in p.blocks.values():
        for s in b.stmts:
            if isinstance(s, Store):
                return True
            exprs.append(getattr(s, "expr", None) or getattr(s, "cond", None))
        exprs.append(getattr(b.term, "cond", None))
    return any(isinstance(n, Deref) for e in exprs if e is not None for n in subexprs(e))


def unsound_witnesses(
    p: Program,
    q: Predicate,
    witnesses: list[Witness],
    space: list[State],
    exploits: frozenset[State],
    domain,
) -> list[tuple[Witness, State]]:
    out = []
    for w in witnesses:
        if isinstance(w.verdict, Unsat):
            continue
        outside = (s for s in space if s not in exploits)
        bad = next(satisfying(w.precondition, outside, domain), None)
        if bad is not None:
            out.append((w, bad))
    return out


def _minimize(p: Program, still_bad: Callable[[Program], bool]) -> Program:
    """Greedily drop statements while the failure persists."""
    changed = True
    while changed:
        changed = False
        for addr, block in sorted(p.blocks.items()):
            for i in range(len(block.stmts)):
                stmts = block.stmts[:i] + block.stmts[i + 1 :]
                blocks = dict(p.blocks)
                blocks[addr] = Block(stmts, block.term)
                candidate = Program(p.entry, blocks)
                try:
                    bad = still_bad(candidate)
                except Exception:
                    bad = False
                if bad:
                    p, changed = candidate, True
                    break
            if changed:
                break
    return p


def _soundness_case(p, q, limits, cfg, space, fuel, rep: SuiteReport) -> None:
    space = list(space)

    def violations(prog: Program):
        ws, _ = explore(prog, q, limits, cfg)
        exploits = oracle(prog, q, space, fuel, cfg.domain).states
        return unsound_witnesses(prog, q, ws, space, exploits, cfg.domain)

    bad = violations(p)
    rep.checked += 1
    if bad:
        small = _minimize(p, lambda cand: bool(violations(cand)))
        w, s = (violations(small) or bad)[0]
        rep.violations.append(Violation(print_program(small), format_predicate(q), format_predicate(w.precondition), _state_json(s)))


RANDOM_LIMITS = Limits(max_depth=6, max_nodes=3_000, max_cases=2_000, max_size=600)


def random_config(domain=(-4, 4)) -> SatConfig:
    # Bounded-domain pruning is unsafe for arbitrary programs: intermediate
    # values can leave the domain even when initial and final ones do not.
    # Witness verdicts are not needed either: models are enumerated directly.
    return SatConfig(tiers=(1,), domain=tuple(domain), bounded_pruning=False)


def soundness_suite(
    cases: Iterable[CorpusCase] | None = None,
    count: int = 200,
    seed: int = 7,
    domain=(-4, 4),
    fuel: int = 32,
    stop_on_violation: bool = False,
) -> SuiteReport:
    """Every state admitted by a witness must reach the postcondition.

    ``stop_on_violation`` ends the run at the first counterexample, which is
    what fault-injection runs want.
    """
    t0 = time.perf_counter()
    rep = SuiteReport("soundness")
    cases = list(cases) if cases is not None else load_corpus(LITMUS)
    cfg = random_config(domain)
    jobs = [(c.program, c.post, c.limits, c.sat_config, c.space, c.fuel) for c in cases]
    randoms = ((p, q, RANDOM_LIMITS, cfg, _random_space(p, q, domain, True), fuel) for p, q in random_cases(seed, count))
    for job in itertools.chain(jobs, randoms):
        _soundness_case(*job, rep)
        if stop_on_violation and rep.violations:
            break
    rep.elapsed = time.perf_counter() - t0
    return rep


@contextlib.contextmanager
def polarity_mutation():
    """Swap the then/else conditions of conditional edges (fault injection)."""
    original = precond.tau_edge

    def mutated(term, target, q, polarity=None):
        flipped = {"then": "else", "else": "then"}.get(polarity, polarity)
        if flipped != polarity:
            swapped = Jump(Not(term.cond), term.then_addr, term.else_addr)
            return original(swapped, target, q, polarity)
        return original(term, target, q, polarity)

    precond.tau_edge = mutated
    try:
        yield
    finally:
        precond.tau_edge = original


MAX_COVER_DEPTH = 8


def _completeness_case(p, q, cfg, space, fuel, rep: SuiteReport, max_nodes: int = 20_000) -> None:
    if any(isinstance(b.term, IJump) for b in p.blocks.values()):
        rep.skip("indirect jump")
        return
    space = list(space)
    orc = oracle(p, q, space, fuel, cfg.domain)
    if orc.nonterminating:
        rep.skip("nonterminating")
        return
    depth = orc.max_edges
    if depth > MAX_COVER_DEPTH:
        rep.skip("exploit depth too large")
        return
    ws, report = explore(p, q, replace(RANDOM_LIMITS, max_depth=depth, max_nodes=max_nodes), cfg)
    if report.stopped_by in ("max-nodes", "max-cases", "max-size"):
        rep.skip("node budget")
        return
    rep.checked += 1
    union = witness_model_union([w.precondition for w in ws if not isinstance(w.verdict, Unsat)], space, cfg.domain)
    missed = sorted(orc.states - union, key=lambda s: (s.vars, s.mem.cells))
    if missed:
        rep.violations.append(Violation(print_program(p), format_predicate(q), "<no covering witness>", _state_json(missed[0])))


def completeness_suite(
    cases: Iterable[CorpusCase] | None = None,
    count: int = 100,
    seed: int = 11,
    domain=(-4, 4),
    fuel: int = 32,
    min_valid: int = 0,
) -> SuiteReport:
    """Oracle exploit states must all satisfy some witness at covering depth.

    Random programs keep every dereference at a constant address, so no
    nested dereference can arise.  With ``min_valid`` set, generation goes
    on until that many random programs were actually checked.
    """
    t0 = time.perf_counter()
    rep = SuiteReport("completeness")
    if cases is None:
        cases = [c for c in load_corpus() if not c.expect.get("smoke")]
    for case in cases:
        comp = case.expect.get("completeness", {})
        space = case.space
        if "space" in comp:
            sp = comp["space"]
            space = StateSpace.of({k: tuple(v) for k, v in sp.get("vars", {}).items()}, {int(a): tuple(v) for a, v in sp.get("cells", {}).items()})
        _completeness_case(case.program, case.post, case.sat_config, space, comp.get("fuel", case.fuel), rep)
    corpus_checked = rep.checked
    cfg = random_config(domain)
    opts = GenOptions(variable_addresses=False)
    generated = 0
    want = max(count, min_valid)
    batch_seed = seed
    while True:
        for p, q in random_cases(batch_seed, count, opts):
            generated += 1
            _completeness_case(p, q, cfg, _random_space(p, q, domain, True), fuel, rep, max_nodes=5_000)
            if rep.checked - corpus_checked >= want and generated >= count:
                break
        if rep.checked - corpus_checked >= want or not min_valid:
            break
        batch_seed += 1_000_003
    rep.checks.append(Check("random programs checked", rep.checked - corpus_checked >= min_valid, f"{rep.checked - corpus_checked} of {generated} generated"))
    rep.elapsed = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Quicksort


def quicksort_study(value_domain=(0, 4)) -> SuiteReport:
    t0 = time.perf_counter()
    case = load_case("quicksort")
    cfg = case.sat_config
    rep = SuiteReport("quicksort")
    space = list(StateSpace.of(cells={0: value_domain, 1: value_domain, 2: value_domain}))
    ws, _ = explore(case.program, case.post, case.limits, cfg)
    sat = [w for w in ws if w.satisfiable]
    union = witness_model_union([w.precondition for w in sat], space, cfg.domain)
    orc = oracle(case.program, case.post, space, case.fuel, cfg.domain).states

    def arr(s: State) -> tuple[int, ...]:
        return tuple(mem_read(a, s.mem) for a in range(3))

    not_min = frozenset(s for s in space if arr(s)[0] > min(arr(s)))
    rep.checked = len(space)
    rep.checks.append(Check("witness union equals oracle", union == orc, f"{len(union)} vs {len(orc)} of {len(space)} arrays"))
    rep.checks.append(Check("a[0] not minimal for every member", all(s in not_min for s in orc), f"{len(orc & not_min)} of {len(orc)}"))
    rep.checks.append(Check("non-empty exactly when some a[0] is not minimal", bool(union) == bool(not_min), f"{len(sat)} satisfiable witness(es)"))
    rep.elapsed = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# Memory axioms


def axioms_suite(n: int = 10_000, seed: int = 0, width: int = 64) -> SuiteReport:
    """Randomized read-after-write, frame, overwrite and commuting-write laws."""
    t0 = time.perf_counter()
    rng = random.Random(seed)
    rep = SuiteReport("axioms")
    failures = []
    for _ in range(n):
        cells = {rng.randrange(-4, 4): rng.randrange(-8, 8) for _ in range(rng.randrange(4))}
        m = Memory.of(cells)
        a, b = rng.randrange(-4, 4), rng.randrange(-4, 4)
        v, w = rng.randrange(-8, 8), rng.randrange(-8, 8)
        laws = [
            ("read-after-write", mem_read(a, mem_write(a, v, m)) == v),
            ("frame", a == b or mem_read(a, mem_write(b, v, m)) == mem_read(a, m)),
            ("overwrite", mem_write(a, w, mem_write(a, v, m)) == mem_write(a, w, m)),
            ("commute", a == b or mem_write(a, v, mem_write(b, w, m)) == mem_write(b, w, mem_write(a, v, m))),
        ]
        for name, ok in laws:
            if not ok:
                failures.append((name, cells, a, b, v, w))
        rep.checked += 1
    rep.checks.append(Check("memory laws", not failures, f"{n} instances, {len(failures)} failures"))
    rep.elapsed = time.perf_counter() - t0
    return rep
