"""SMT-LIB v2 export and a child-process solver bridge (Tier 3).

The script uses fixed-width bit-vectors.  Every JUMP expression becomes a
bit-vector term; truth-valued operators produce 0/1 through ``ite`` so
that arithmetic on comparison results behaves as in the interpreter.
Memory is a single array from addresses to words.
"""
from __future__ import annotations

import shlex
import subprocess
from typing import Iterator

from .core import DEFAULT_WIDTH, BinOp, Const, Deref, Expr, Not, Op, Var, subexprs, wrap
from .predicate import Leaf, Model, Predicate, free_vars, holds, matrix, prefix
from .sat import Sat, SatConfig, Unknown, Unsat, Verdict

_ARITH = {Op.ADD: "bvadd", Op.SUB: "bvsub", Op.MUL: "bvmul", Op.DIV: "bvsdiv", Op.MOD: "bvsrem"}
_CMP = {Op.LT: "bvslt", Op.LE: "bvsle", Op.GT: "bvsgt", Op.GE: "bvsge"}

MEMORY = "mem"


def _sym(name: str) -> str:
    return f"|{name}|"


def _bv(value: int, width: int) -> str:
    return f"(_ bv{value % (1 << width)} {width})"


class _Emitter:
    def __init__(self, width: int):
        self.width = width
        self.zero = _bv(0, width)
        self.one = _bv(1, width)

    def flag(self, cond: str) -> str:
        return f"(ite {cond} {self.one} {self.zero})"

    def nonzero(self, term: str) -> str:
        return f"(distinct {term} {self.zero})"

    def term(self, e: Expr) -> str:
        if isinstance(e, Const):
            return _bv(e.value, self.width)
        if isinstance(e, Var):
            return _sym(e.name)
        if isinstance(e, Deref):
            return f"(select {MEMORY} {self.term(e.addr)})"
        if isinstance(e, Not):
            return self.flag(f"(= {self.term(e.operand)} {self.zero})")
        a, b = self.term(e.left), self.term(e.right)
        if e.op in _ARITH:
            return f"({_ARITH[e.op]} {a} {b})"
        if e.op in _CMP:
            return self.flag(f"({_CMP[e.op]} {a} {b})")
        if e.op in (Op.EQ, Op.ALIAS):
            return self.flag(f"(= {a} {b})")
        if e.op in (Op.NE, Op.SEP):
            return self.flag(f"(distinct {a} {b})")
        if e.op is Op.AND:
            return self.flag(f"(and {self.nonzero(a)} {self.nonzero(b)})")
        if e.op is Op.OR:
            return self.flag(f"(or {self.nonzero(a)} {self.nonzero(b)})")
        raise ValueError(f"unsupported operator {e.op}")

    def holds(self, e: Expr) -> str:
        """Truth of ``e``, with every divisor required to be non-zero."""
        parts = [self.nonzero(self.term(e))]
        for n in subexprs(e):
            if isinstance(n, BinOp) and n.op in (Op.DIV, Op.MOD):
                parts.append(self.nonzero(self.term(n.right)))
        return parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"

    def formula(self, p: Predicate) -> str:
        if isinstance(p, Leaf):
            return self.holds(p.expr)
        sort = f"(_ BitVec {self.width})"
        return f"(exists (({_sym(p.var)} {sort})) (and {self.holds(p.bound)} {self.formula(p.body)}))"


def _uses_memory(p: Predicate) -> bool:
    exprs = [b for _, b in prefix(p)] + [matrix(p)]
    return any(isinstance(n, Deref) for e in exprs for n in subexprs(e))


def emit_smtlib(p: Predicate, width: int = DEFAULT_WIDTH) -> str:
    em = _Emitter(width)
    sort = f"(_ BitVec {width})"
    lines = ["(set-option :produce-models true)"]
    for name in sorted(free_vars(p)):
        lines.append(f"(declare-fun {_sym(name)} () {sort})")
    if _uses_memory(p):
        lines.append(f"(declare-fun {MEMORY} () (Array {sort} {sort}))")
    lines.append(f"(assert {em.formula(p)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Reading solver replies


def _tokens(text: str) -> Iterator[str]:
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            yield text[i : j + 1]
            i = j + 1
        elif c == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            yield text[i:j]
            i = j


def parse_sexprs(text: str) -> list:
    stack: list[list] = [[]]
    for tok in _tokens(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ValueError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ValueError("unbalanced '('")
    return stack[0]


def _bv_value(term, width: int) -> int | None:
    if isinstance(term, str):
        if term.startswith("#x"):
            return wrap(int(term[2:], 16), width)
        if term.startswith("#b"):
            return wrap(int(term[2:], 2), width)
        return None
    if len(term) == 3 and term[0] == "_" and isinstance(term[1], str) and term[1].startswith("bv"):
        return wrap(int(term[1][2:]), width)
    return None


def _array_fn(term, width: int):
    """Decode a ``store`` chain over ``(as const ...)`` into a lookup function."""
    if isinstance(term, list) and term and term[0] == "store" and len(term) == 4:
        inner = _array_fn(term[1], width)
        k, v = _bv_value(term[2], width), _bv_value(term[3], width)
        if inner is None or k is None or v is None:
            return None
        return lambda a: v if a == k else inner(a)
    if isinstance(term, list) and len(term) == 2 and isinstance(term[0], list) and term[0][:2] == ["as", "const"]:
        default = _bv_value(term[1], width)
        if default is not None:
            return lambda a: default
    return None


class _RecordingCells(dict):
    """Cell mapping backed by a solver array; remembers which cells were read."""

    def __init__(self, fn):
        super().__init__()
        self.fn = fn
        self.seen: dict[int, int] = {}

    def get(self, addr, default=None):
        value = self.fn(addr)
        self.seen[addr] = value
        return value


def parse_model(text: str, p: Predicate, cfg: SatConfig) -> Model | None:
    """Build a :class:`Model` from a ``get-model`` reply.

    Memory is materialized only for the cells ``p`` actually reads, found by
    evaluating ``p`` against the solver's array.
    """
    width = cfg.width
    try:
        forms = parse_sexprs(text)
    except (ValueError, IndexError):
        return None
    defs = []
    for form in forms:
        if isinstance(form, list):
            body = form[1:] if form and form[0] == "model" else form
            defs.extend(d for d in body if isinstance(d, list) and d and d[0] == "define-fun")
    names = free_vars(p)
    env: dict[str, int] = {}
    array = None
    for d in defs:
        if len(d) != 5:
            continue
        name = d[1].strip("|")
        if name in names:
            value = _bv_value(d[4], width)
            if value is not None:
                env[name] = value
        elif name == MEMORY:
            array = _array_fn(d[4], width)
    if not _uses_memory(p):
        return Model(env, {})
    if array is None:
        return None
    recorder = _RecordingCells(array)
    holds(p, Model(env, recorder), cfg.domain, width)
    return Model(env, dict(recorder.seen))


def solve(p: Predicate, cfg: SatConfig) -> Verdict:
    """Run the configured solver on ``p``; failures become ``Unknown``."""
    if not cfg.solver:
        return Unknown("no solver configured")
    script = emit_smtlib(p, cfg.width)
    try:
        proc = subprocess.run(
            shlex.split(cfg.solver),
            input=script,
            capture_output=True,
            text=True,
            timeout=cfg.timeout,
        )
    except (OSError, subprocess.TimeoutExpired) as exc:
        return Unknown(f"solver failed: {exc}")
    reply = proc.stdout.strip()
    first, _, rest = reply.partition("\n")
    first = first.strip()
    if first == "unsat":
        return Unsat(tier=3)
    if first == "sat":
        model = parse_model(rest, p, cfg)
        if model is None:
            return Unknown("could not read the solver's model")
        return Sat(model, tier=3)
    diag = first or proc.stderr.strip()
    return Unknown(f"solver said {diag!r}")
