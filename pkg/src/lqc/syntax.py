"""Surface syntax: the abstract syntax tree with its parser and pretty-printer.

Top-level declarations start in column 1; everything else is free-form,
with ``;`` separating let bindings and case alternatives.  See
``docs/grammar.md`` for the grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from .constraints import Atom, SimpleConstraint
from .errors import NOPOS, ParseError, Pos
from .mult import MANY, ONE, Mult
from .types import (
    Constrained,
    TApp,
    TArrow,
    TCon,
    TExists,
    TVar,
    Type,
    UNIT,
    _render,
    pair_t,
    render as render_type,
)

KEYWORDS = {
    "let", "letw", "in", "case", "casew", "of", "if", "then", "else",
    "pack", "forall", "exists", "many",
}

# ---------------------------------------------------------------------------
# abstract syntax


def _pos() -> Pos:
    return field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Scheme:
    """``forall vs. Q => body``; ``binders`` lists only explicit ones."""

    binders: tuple[str, ...]
    assume: SimpleConstraint
    body: Type

    def render(self) -> str:
        q = "forall " + " ".join(self.binders) + ". " if self.binders else ""
        return q + self.assume.render_context(render_type(self.body))


# patterns


@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PWild:
    pass


@dataclass(frozen=True)
class PCon:
    """Constructor pattern.  ``Unit`` and ``Pair`` print as ``()`` and ``(x, y)``."""

    con: str
    args: tuple["Pattern", ...] = ()


Pattern = Union[PVar, PWild, PCon]


# expressions


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Con:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Lit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class Tuple:
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Lam:
    params: tuple[str, ...]
    body: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class App:
    fun: "Expr"
    arg: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Pack:
    body: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: "Expr"
    then: "Expr"
    orelse: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Alt:
    pat: Pattern
    body: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Case:
    mult: Mult
    scrut: "Expr"
    alts: tuple[Alt, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class SigBind:
    name: str
    scheme: Scheme
    params: tuple[str, ...]
    rhs: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class ValBind:
    """``pat = e``; a bare variable pattern with parameters is a local function."""

    pat: Pattern
    params: tuple[str, ...]
    rhs: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class PackBind:
    pat: Pattern
    rhs: "Expr"
    pos: Pos = _pos()


Binding = Union[SigBind, ValBind, PackBind]


@dataclass(frozen=True)
class Let:
    mult: Mult
    binds: tuple[Binding, ...]
    body: "Expr"
    pos: Pos = _pos()


Expr = Union[Var, Con, Lit, Tuple, Lam, App, BinOp, Pack, If, Case, Let]


@dataclass(frozen=True)
class Decl:
    name: str
    scheme: Scheme | None
    params: tuple[str, ...]
    body: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]

    def names(self) -> list[str]:
        return [d.name for d in self.decls]


# ---------------------------------------------------------------------------
# lexer


@dataclass(frozen=True)
class Token:
    kind: str  # ident, conid, int, sym, kw, eof
    text: str
    pos: Pos


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<int>[0-9]+)
  | (?P<arrow>->|-o(?![A-Za-z0-9_'])|=>|=o(?![A-Za-z0-9_'])|::|==|<=|>=)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym>[()\[\],;{}.=\\+\-*<>$])
    """,
    re.VERBOSE,
)


def tokenize(src: str) -> list[Token]:
    toks: list[Token] = []
    line, col_start = 1, 0
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ParseError(f"unexpected character {src[i]!r}", Pos(line, i - col_start + 1))
        kind = m.lastgroup
        text = m.group()
        pos = Pos(line, i - col_start + 1)
        if kind == "nl":
            line += 1
            col_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "int":
            toks.append(Token("int", text, pos))
        elif kind == "ident":
            if text in KEYWORDS:
                toks.append(Token("kw", text, pos))
            elif text == "_":
                toks.append(Token("sym", "_", pos))
            elif text[0].isupper():
                toks.append(Token("conid", text, pos))
            else:
                toks.append(Token("ident", text, pos))
        else:
            toks.append(Token("sym", text, pos))
        i = m.end()
    toks.append(Token("eof", "", Pos(line, i - col_start + 1)))
    return toks


# ---------------------------------------------------------------------------
# parser


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("sym", "kw") and t.text == text

    def advance(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.peek()
            raise ParseError(f"unexpected {_describe(t)}", t.pos, (repr(text),))
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(f"unexpected {_describe(t)}", t.pos, (what,))
        return self.advance()

    def attempt(self, fn):
        """Run ``fn``; on a parse failure rewind and return None."""
        saved = self.i
        try:
            return fn()
        except (ParseError, _Backtrack):
            self.i = saved
            return None

    # -- types ------------------------------------------------------------

    def scheme(self) -> Scheme:
        binders: tuple[str, ...] = ()
        if self.at("forall"):
            self.advance()
            binders = self.tyvars()
            self.expect(".")
        q_body = self.attempt(self._qualified)
        if q_body is not None:
            q, body = q_body
            return Scheme(binders, q, body)
        return Scheme(binders, SimpleConstraint(), self.type_())

    def _qualified(self) -> tuple[SimpleConstraint, Type]:
        q = self.context()
        if self.at("=>"):
            self.advance()
            q = SimpleConstraint(q.U + q.L, ())
        elif self.at("=o"):
            self.advance()
        else:
            raise _Backtrack()
        return q, self.type_()

    def tyvars(self) -> tuple[str, ...]:
        vs = []
        while self.peek().kind == "ident":
            vs.append(self.advance().text)
        if len(set(vs)) != len(vs):
            raise ParseError("repeated type variable in binder list", self.peek().pos)
        return tuple(vs)

    def context(self) -> SimpleConstraint:
        """A single atom, or a parenthesised list with optional ``many`` marks."""
        if self.at("("):
            self.advance()
            U: list[Atom] = []
            L: list[Atom] = []
            if not self.at(")"):
                while True:
                    self._catom(U, L)
                    if self.at(","):
                        self.advance()
                        continue
                    break
            self.expect(")")
            return SimpleConstraint(tuple(U), tuple(L))
        U, L = [], []
        self._catom(U, L, allow_many=False)
        return SimpleConstraint(tuple(U), tuple(L))

    def _catom(self, U: list, L: list, allow_many: bool = True) -> None:
        many = False
        if allow_many and self.at("many"):
            self.advance()
            many = True
        name = self.expect_kind("conid", "constraint name").text
        args = []
        while self._starts_atype():
            args.append(self.atype())
        atoms = expand_synonym(name, tuple(args))
        (U if many else L).extend(atoms)

    def type_(self) -> Type:
        if self.at("exists"):
            return self.exists_type()
        t = self.btype()
        if self.at("->") or self.at("-o"):
            m = MANY if self.advance().text == "->" else ONE
            return TArrow(t, m, self.type_())
        return t

    def exists_type(self) -> Type:
        self.expect("exists")
        bs = self.tyvars()
        self.expect(".")
        body = self.btype()
        self.expect("*")
        if not self.at("("):
            raise ParseError("package payload must be parenthesised", self.peek().pos, ("'('",))
        payload = self.context()
        return TExists(bs, body, payload)

    def btype(self) -> Type:
        head = self.atype()
        while self._starts_atype():
            head = TApp(head, self.atype())
        return head

    def _starts_atype(self) -> bool:
        t = self.peek()
        return t.kind in ("ident", "conid") or self.at("(")

    def atype(self) -> Type:
        t = self.peek()
        if t.kind == "ident":
            self.advance()
            return TVar(t.text)
        if t.kind == "conid":
            self.advance()
            return TCon(t.text)
        if self.at("("):
            start = self.i
            self.advance()
            if self.at(")"):
                self.advance()
                return UNIT
            c = self.attempt(self._constrained_inner)
            if c is not None:
                return c
            self.i = start + 1
            first = self.type_()
            if self.at(","):
                self.advance()
                second = self.type_()
                self.expect(")")
                return pair_t(first, second)
            self.expect(")")
            return first
        raise ParseError(f"unexpected {_describe(t)}", t.pos, ("type",))

    def _constrained_inner(self) -> Type:
        bs: tuple[str, ...] = ()
        if self.at("forall"):
            self.advance()
            bs = self.tyvars()
            self.expect(".")
        q, body = self._qualified()
        self.expect(")")
        return Constrained(bs, q, body)

    # -- patterns ---------------------------------------------------------

    def pattern(self) -> Pattern:
        """Top pattern: constructor with arguments, or an atomic pattern."""
        t = self.peek()
        if t.kind == "conid":
            self.advance()
            args = []
            while self._starts_apat():
                args.append(self.apat())
            return PCon(t.text, tuple(args))
        return self.apat()

    def _starts_apat(self) -> bool:
        t = self.peek()
        return t.kind in ("ident", "conid") or self.at("_") or self.at("(")

    def apat(self) -> Pattern:
        t = self.peek()
        if t.kind == "ident":
            self.advance()
            return PVar(t.text)
        if self.at("_"):
            self.advance()
            return PWild()
        if t.kind == "conid":
            self.advance()
            return PCon(t.text)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return PCon("Unit")
            first = self.pattern()
            if self.at(","):
                self.advance()
                second = self.pattern()
                self.expect(")")
                return PCon("Pair", (first, second))
            self.expect(")")
            return first
        raise ParseError(f"unexpected {_describe(t)}", t.pos, ("pattern",))

    # -- expressions ------------------------------------------------------

    def expr(self) -> Expr:
        t = self.peek()
        if self.at("\\"):
            self.advance()
            params = []
            while self.peek().kind == "ident" or self.at("_"):
                params.append(self.advance().text)
            if not params:
                raise ParseError("lambda needs at least one parameter", self.peek().pos, ("identifier",))
            self.expect("->")
            return Lam(tuple(params), self.expr(), t.pos)
        if self.at("let") or self.at("letw"):
            m = ONE if self.advance().text == "let" else MANY
            binds = [self.binding()]
            while self.at(";"):
                self.advance()
                binds.append(self.binding())
            self.expect("in")
            return Let(m, tuple(binds), self.expr(), t.pos)
        if self.at("if"):
            self.advance()
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            return If(c, a, self.expr(), t.pos)
        if self.at("case") or self.at("casew"):
            m = ONE if self.advance().text == "case" else MANY
            scrut = self.expr()
            self.expect("of")
            self.expect("{")
            alts = [self.alt()]
            while self.at(";"):
                self.advance()
                alts.append(self.alt())
            self.expect("}")
            return Case(m, scrut, tuple(alts), t.pos)
        e = self.comparison()
        if self.at("$"):
            p = self.advance().pos
            return App(e, self.expr(), p)
        return e

    def alt(self) -> Alt:
        p = self.peek().pos
        pat = self.pattern()
        self.expect("->")
        return Alt(pat, self.expr(), p)

    def binding(self) -> Binding:
        t = self.peek()
        if self.at("pack"):
            self.advance()
            pat = self.apat()
            self.expect("=")
            return PackBind(pat, self.expr(), t.pos)
        if t.kind == "ident" and self.at("::", 1):
            self.advance()
            self.advance()
            sch = self.scheme()
            self.expect(";")
            again = self.expect_kind("ident", f"definition of {t.text}")
            if again.text != t.text:
                raise ParseError(f"signature for {t.text} followed by definition of {again.text}", again.pos)
            params = self._params()
            self.expect("=")
            return SigBind(t.text, sch, params, self.expr(), t.pos)
        if t.kind == "ident":
            self.advance()
            params = self._params()
            self.expect("=")
            return ValBind(PVar(t.text), params, self.expr(), t.pos)
        pat = self.pattern()
        self.expect("=")
        return ValBind(pat, (), self.expr(), t.pos)

    def _params(self) -> tuple[str, ...]:
        ps = []
        while self.peek().kind == "ident" or self.at("_"):
            ps.append(self.advance().text)
        return tuple(ps)

    def comparison(self) -> Expr:
        e = self.arith()
        t = self.peek()
        if t.kind == "sym" and t.text in ("==", "<=", ">=", "<", ">"):
            self.advance()
            return BinOp(t.text, e, self.arith(), t.pos)
        return e

    def arith(self) -> Expr:
        e = self.term()
        while self.at("+") or self.at("-"):
            t = self.advance()
            e = BinOp(t.text, e, self.term(), t.pos)
        return e

    def term(self) -> Expr:
        e = self.application()
        while self.at("*"):
            t = self.advance()
            e = BinOp("*", e, self.application(), t.pos)
        return e

    def application(self) -> Expr:
        t = self.peek()
        if self.at("pack"):
            self.advance()
            return Pack(self.aexp(), t.pos)
        e = self.aexp()
        while self._starts_aexp():
            a = self.aexp()
            e = App(e, a, _pos_of(e))
        return e

    def _starts_aexp(self) -> bool:
        t = self.peek()
        return t.kind in ("ident", "conid", "int") or self.at("(")

    def aexp(self) -> Expr:
        t = self.peek()
        if t.kind == "ident":
            self.advance()
            return Var(t.text, t.pos)
        if t.kind == "conid":
            self.advance()
            return Con(t.text, t.pos)
        if t.kind == "int":
            self.advance()
            return Lit(int(t.text), t.pos)
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return Con("Unit", t.pos)
            e = self.expr()
            if self.at(","):
                self.advance()
                r = self.expr()
                self.expect(")")
                return Tuple(e, r, t.pos)
            self.expect(")")
            return e
        raise ParseError(f"unexpected {_describe(t)}", t.pos, ("expression",))

    # -- declarations -----------------------------------------------------

    def at_end(self) -> bool:
        return self.peek().kind == "eof"


def _pos_of(e) -> Pos:
    return getattr(e, "pos", NOPOS)


def _describe(t: Token) -> str:
    return "end of input" if t.kind == "eof" else repr(t.text)


def expand_synonym(name: str, args: tuple[Type, ...]) -> list[Atom]:
    if name == "RW":
        if len(args) != 1:
            raise ParseError("RW takes exactly one location argument")
        return [Atom("Read", args), Atom("Write", args)]
    return [Atom(name, args)]


def _split_decls(toks: list[Token]) -> list[list[Token]]:
    groups: list[list[Token]] = []
    for t in toks[:-1]:
        if t.pos.col == 1 or not groups:
            if t.pos.col != 1:
                raise ParseError("declarations must start in column 1", t.pos)
            groups.append([])
        groups[-1].append(t)
    eof = toks[-1]
    return [g + [Token("eof", "", _end_pos(g, eof))] for g in groups]


def _end_pos(group: list[Token], eof: Token) -> Pos:
    last = group[-1]
    return Pos(last.pos.line, last.pos.col + len(last.text))


def parse(src: str) -> Program:
    """Parse a whole source file."""
    toks = tokenize(src)
    groups = _split_decls(toks)
    decls: list[Decl] = []
    pending: tuple[str, Scheme, Pos] | None = None
    for g in groups:
        p = Parser(g)
        head = p.expect_kind("ident", "declaration name")
        if p.at("::"):
            if pending is not None:
                raise ParseError(f"signature for {pending[0]} has no definition", pending[2])
            p.advance()
            sch = p.scheme()
            _expect_end(p)
            pending = (head.text, sch, head.pos)
            continue
        params = p._params()
        p.expect("=")
        body = p.expr()
        _expect_end(p)
        scheme = None
        if pending is not None:
            if pending[0] != head.text:
                raise ParseError(f"signature for {pending[0]} has no definition", pending[2])
            scheme = pending[1]
            pending = None
        decls.append(Decl(head.text, scheme, params, body, head.pos))
    if pending is not None:
        raise ParseError(f"signature for {pending[0]} has no definition", pending[2])
    names = [d.name for d in decls]
    for i, d in enumerate(decls):
        if d.name in names[:i]:
            raise ParseError(f"duplicate definition of {d.name}", d.pos)
    return Program(tuple(decls))


def _expect_end(p: Parser) -> None:
    if not p.at_end():
        t = p.peek()
        raise ParseError(f"unexpected {_describe(t)}", t.pos, ("end of declaration",))


def parse_expr(src: str) -> Expr:
    p = Parser(tokenize(src))
    e = p.expr()
    _expect_end(p)
    return e


def parse_scheme(src: str) -> Scheme:
    p = Parser(tokenize(src))
    s = p.scheme()
    _expect_end(p)
    return s


def parse_type(src: str) -> Type:
    p = Parser(tokenize(src))
    t = p.type_()
    _expect_end(p)
    return t


# ---------------------------------------------------------------------------
# pretty-printer


def pretty_pattern(p: Pattern, top: bool = True) -> str:
    if isinstance(p, PVar):
        return p.name
    if isinstance(p, PWild):
        return "_"
    if p.con == "Unit" and not p.args:
        return "()"
    if p.con == "Pair" and len(p.args) == 2:
        return f"({pretty_pattern(p.args[0])}, {pretty_pattern(p.args[1])})"
    if not p.args:
        return p.con
    s = " ".join([p.con] + [pretty_pattern(a, False) for a in p.args])
    return s if top else f"({s})"


_PREC = {"==": 1, "<=": 1, ">=": 1, "<": 1, ">": 1, "+": 2, "-": 2, "*": 3}


def pretty_expr(e: Expr, prec: int = 0, indent: int = 2) -> str:
    """``prec``: 0 anywhere, 1 comparison operand, 2/3 arithmetic, 4 application
    head, 5 application argument."""
    pad = " " * indent
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Con):
        return "()" if e.name == "Unit" else e.name
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, Tuple):
        return f"({pretty_expr(e.left, 0, indent)}, {pretty_expr(e.right, 0, indent)})"
    if isinstance(e, App):
        s = f"{pretty_expr(e.fun, 4, indent)} {pretty_expr(e.arg, 5, indent)}"
        return f"({s})" if prec >= 5 else s
    if isinstance(e, Pack):
        s = f"pack {pretty_expr(e.body, 5, indent)}"
        return f"({s})" if prec >= 4 else s
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        # comparisons are non-associative, arithmetic is left-associative
        right_prec = p + 1
        left_prec = p + 1 if p == 1 else p
        s = f"{pretty_expr(e.left, left_prec, indent)} {e.op} {pretty_expr(e.right, right_prec, indent)}"
        return f"({s})" if prec > p or (prec == p and p == 1) else s
    # the remaining forms extend as far right as possible
    if isinstance(e, Lam):
        s = f"\\{' '.join(e.params)} -> {pretty_expr(e.body, 0, indent)}"
    elif isinstance(e, If):
        s = (f"if {pretty_expr(e.cond, 0, indent)} then {pretty_expr(e.then, 0, indent + 2)}"
             f"\n{pad}else {pretty_expr(e.orelse, 0, indent + 2)}")
    elif isinstance(e, Case):
        kw = "case" if e.mult is ONE else "casew"
        alts = f"\n{pad}; ".join(
            f"{pretty_pattern(a.pat)} -> {pretty_expr(a.body, 0, indent + 4)}" for a in e.alts)
        s = f"{kw} {pretty_expr(e.scrut, 0, indent)} of\n{pad}{{ {alts}\n{pad}}}"
    elif isinstance(e, Let):
        kw = "let" if e.mult is ONE else "letw"
        inner = " " * (indent + 2)
        binds = f"\n{inner}; ".join(pretty_binding(b, indent + 4) for b in e.binds)
        s = f"{kw} {binds}\n{pad}in {pretty_expr(e.body, 0, indent)}"
    else:
        raise TypeError(f"not an expression: {e!r}")
    return f"({s})" if prec > 0 else s


def pretty_binding(b: Binding, indent: int) -> str:
    if isinstance(b, PackBind):
        return f"pack {pretty_pattern(b.pat, False)} = {pretty_expr(b.rhs, 0, indent)}"
    if isinstance(b, SigBind):
        params = "".join(" " + p for p in b.params)
        return f"{b.name} :: {b.scheme.render()} ; {b.name}{params} = {pretty_expr(b.rhs, 0, indent)}"
    params = "".join(" " + p for p in b.params)
    return f"{pretty_pattern(b.pat)}{params} = {pretty_expr(b.rhs, 0, indent)}"


def pretty(prog: Program) -> str:
    out = []
    for d in prog.decls:
        if d.scheme is not None:
            out.append(f"{d.name} :: {d.scheme.render()}")
        params = "".join(" " + p for p in d.params)
        out.append(f"{d.name}{params} =\n  {pretty_expr(d.body, 0, 2)}")
        out.append("")
    return "\n".join(out)


__all__ = [
    "Scheme", "PVar", "PWild", "PCon", "Pattern", "Var", "Con", "Lit", "Tuple", "Lam", "App", "BinOp",
    "Pack", "If", "Alt", "Case", "SigBind", "ValBind", "PackBind", "Binding", "Let", "Expr", "Decl",
    "Program", "Token", "tokenize", "Parser", "parse", "parse_expr", "parse_scheme", "parse_type",
    "pretty", "pretty_expr", "pretty_pattern", "expand_synonym", "render_type", "_render",
]
