"""Concrete ASCII syntax for programs and predicates, plus a printer.

Program text::

    # comments run to end of line
    entry 0
    block 0: y := 0; jump (x < 0 || x > 3) 9 1
    block 1: ijump x
    block 9: exit

Statements are ``v := e``, ``v <- some e`` and ``[e1] := e2``; a block ends
with ``jump c a1 a2`` (``c`` must be an atom or parenthesized),
``ijump e`` or ``exit``.  ``[e]`` dereferences, ``!e`` negates.
Predicates may start with quantifiers: ``E i in (1 < i && i < n) . n % i == 0``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .core import (
    DEFAULT_WIDTH,
    Assign,
    BinOp,
    Block,
    Const,
    Deref,
    Exit,
    Expr,
    IJump,
    Jump,
    NDAssign,
    Not,
    Op,
    Program,
    Stmt,
    Store,
    Terminator,
    Var,
    wrap,
)
from .predicate import Exists, Leaf, Predicate

KEYWORDS = {"entry", "block", "jump", "ijump", "exit", "some", "E", "in", "sep", "alias", "true", "false"}


class SourceError(Exception):
    def __init__(self, line: int, column: int, message: str, kind: str = "parse"):
        super().__init__(f"{line}:{column}: {kind} error: {message}")
        self.line = line
        self.column = column
        self.message = message
        self.kind = kind


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "op", "eof"
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>\$?[A-Za-z_][A-Za-z0-9_]*|\$\d+)
  | (?P<op>:=|<-|<=|>=|==|!=|&&|\|\||[-+*/%<>!\[\]():;,.])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise SourceError(line, pos - line_start + 1, f"unexpected character {text[pos]!r}", "lex")
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# binding strength, loosest first
_LEVELS: list[dict[str, Op]] = [
    {"||": Op.OR},
    {"&&": Op.AND},
    {"==": Op.EQ, "!=": Op.NE},
    {"<": Op.LT, "<=": Op.LE, ">": Op.GT, ">=": Op.GE},
    {"+": Op.ADD, "-": Op.SUB},
    {"*": Op.MUL, "/": Op.DIV, "%": Op.MOD},
]
_PREC = {op: i for i, level in enumerate(_LEVELS) for op in level.values()}
_UNARY_PREC = len(_LEVELS)


class _Parser:
    def __init__(self, text: str, width: int):
        self.tokens = tokenize(text)
        self.pos = 0
        self.width = width

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message: str, tok: Token | None = None, kind: str = "parse") -> SourceError:
        tok = tok or self.tok
        return SourceError(tok.line, tok.column, message, kind)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("op", "kw") and self.tok.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def signed_int(self) -> tuple[int, Token]:
        start = self.tok
        neg = False
        if self.at("-"):
            self.advance()
            neg = True
        if self.tok.kind != "int":
            raise self.error("expected an integer")
        value = int(self.advance().text)
        return wrap(-value if neg else value, self.width), start

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected a variable name, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    # -- expressions -------------------------------------------------------

    def expr(self, level: int = 0) -> Expr:
        if level == len(_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        ops = _LEVELS[level]
        while self.tok.kind == "op" and self.tok.text in ops:
            op = ops[self.advance().text]
            right = self.expr(level + 1)
            left = BinOp(op, left, right)
        return left

    def unary(self) -> Expr:
        if self.at("!"):
            self.advance()
            return Not(self.unary())
        if self.at("-"):
            self.advance()
            if self.tok.kind == "int":
                return Const(wrap(-int(self.advance().text), self.width))
            return BinOp(Op.SUB, Const(0), self.unary())
        return self.primary()

    def primary(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Const(wrap(int(t.text), self.width))
        if t.kind == "ident":
            self.advance()
            return Var(t.text)
        if t.kind == "kw":
            if t.text in ("true", "false"):
                self.advance()
                return Const(1 if t.text == "true" else 0)
            if t.text in ("sep", "alias"):
                self.advance()
                self.expect("(")
                a = self.expr()
                self.expect(",")
                b = self.expr()
                self.expect(")")
                return BinOp(Op.SEP if t.text == "sep" else Op.ALIAS, a, b)
            if t.text == "E":
                raise self.error("quantifiers are only allowed as an outermost prefix")
        if self.at("["):
            self.advance()
            inner = self.expr()
            self.expect("]")
            return Deref(inner)
        if self.at("("):
            self.advance()
            inner = self.expr()
            self.expect(")")
            return inner
        raise self.error(f"expected an expression, found {t.text or 'end of input'!r}")

    def predicate(self) -> Predicate:
        if self.at("E"):
            self.advance()
            var = self.ident().text
            self.expect("in")
            bound = self.expr()
            self.expect(".")
            return Exists(var, bound, self.predicate())
        return Leaf(self.expr())

    # -- programs ----------------------------------------------------------

    def stmt(self) -> Stmt:
        if self.at("["):
            self.advance()
            addr = self.expr()
            self.expect("]")
            self.expect(":=")
            return Store(addr, self.expr())
        name = self.ident().text
        if self.at(":="):
            self.advance()
            return Assign(name, self.expr())
        if self.at("<-"):
            self.advance()
            self.expect("some")
            return NDAssign(name, self.expr())
        raise self.error("expected ':=' or '<- some'")

    def terminator(self, targets: list[tuple[int, Token]]) -> Terminator:
        if self.at("jump"):
            self.advance()
            cond = self.unary()
            a1, t1 = self.signed_int()
            a2, t2 = self.signed_int()
            targets.extend([(a1, t1), (a2, t2)])
            return Jump(cond, a1, a2)
        if self.at("ijump"):
            self.advance()
            return IJump(self.expr())
        if self.at("exit"):
            self.advance()
            return Exit()
        return None  # type: ignore[return-value]

    def program(self) -> Program:
        self.expect("entry")
        entry, entry_tok = self.signed_int()
        blocks: dict[int, Block] = {}
        targets: list[tuple[int, Token]] = []
        while self.at("block"):
            self.advance()
            addr, addr_tok = self.signed_int()
            if addr in blocks:
                raise self.error(f"duplicate block {addr}", addr_tok, "resolve")
            self.expect(":")
            stmts = []
            while True:
                term = self.terminator(targets)
                if term is not None:
                    break
                stmts.append(self.stmt())
                self.expect(";")
            if self.at(";"):
                self.advance()
            blocks[addr] = Block(tuple(stmts), term)
        if self.tok.kind != "eof":
            raise self.error(f"expected 'block', found {self.tok.text!r}")
        if entry not in blocks:
            raise self.error(f"entry {entry} is not a declared block", entry_tok, "resolve")
        for target, tok in targets:
            if target not in blocks:
                raise self.error(f"jump to undeclared block {target}", tok, "resolve")
        return Program(entry, blocks)

    def finish(self) -> None:
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")


def parse_program(text: str, width: int = DEFAULT_WIDTH) -> Program:
    return _Parser(text, width).program()


def parse_predicate(text: str, width: int = DEFAULT_WIDTH) -> Predicate:
    p = _Parser(text, width)
    out = p.predicate()
    p.finish()
    return out


def parse_expr(text: str, width: int = DEFAULT_WIDTH) -> Expr:
    p = _Parser(text, width)
    out = p.expr()
    p.finish()
    return out


# ---------------------------------------------------------------------------
# Printing


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp) and e.op not in (Op.SEP, Op.ALIAS):
        return _PREC[e.op]
    if isinstance(e, Not):
        return _UNARY_PREC
    if isinstance(e, Const) and e.value < 0:
        return _UNARY_PREC
    return _UNARY_PREC + 1


def format_expr(e: Expr) -> str:
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Deref):
        return f"[{format_expr(e.addr)}]"
    if isinstance(e, Not):
        return "!" + _wrap(e.operand, _UNARY_PREC)
    if e.op in (Op.SEP, Op.ALIAS):
        return f"{e.op.value}({format_expr(e.left)}, {format_expr(e.right)})"
    p = _PREC[e.op]
    left = _wrap(e.left, p)
    right = _wrap(e.right, p + 1)
    return f"{left} {e.op.value} {right}"


def _wrap(e: Expr, min_prec: int) -> str:
    text = format_expr(e)
    return f"({text})" if _prec(e) < min_prec else text


def _atom(e: Expr) -> str:
    text = format_expr(e)
    return text if _prec(e) > _UNARY_PREC else f"({text})"


def format_predicate(p: Predicate) -> str:
    parts = []
    while isinstance(p, Exists):
        parts.append(f"E {p.var} in {_atom(p.bound)} . ")
        p = p.body
    return "".join(parts) + format_expr(p.expr)


def format_stmt(s: Stmt) -> str:
    if isinstance(s, Assign):
        return f"{s.var} := {format_expr(s.expr)}"
    if isinstance(s, NDAssign):
        return f"{s.var} <- some {format_expr(s.cond)}"
    return f"[{format_expr(s.addr)}] := {format_expr(s.value)}"


def format_terminator(t: Terminator) -> str:
    if isinstance(t, Jump):
        return f"jump {_atom(t.cond)} {t.then_addr} {t.else_addr}"
    if isinstance(t, IJump):
        return f"ijump {format_expr(t.target)}"
    return "exit"


def iter_program_lines(p: Program) -> Iterator[str]:
    yield f"entry {p.entry}"
    for addr in sorted(p.blocks):
        block = p.blocks[addr]
        parts = [format_stmt(s) for s in block.stmts] + [format_terminator(block.term)]
        yield f"block {addr}: " + "; ".join(parts)


def print_program(p: Program) -> str:
    return "\n".join(iter_program_lines(p)) + "\n"
