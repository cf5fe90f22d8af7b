"""Desugared expression forms consumed by the type oracle.

The surface language has multi-parameter lambdas, nested patterns, ``if``
and operator sugar; the kernel has one construct per typing rule.  Fresh
names start with ``%`` so they can never clash with user identifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Union

from . import syntax as S
from .errors import NOPOS, Pos, TypeCheckError
from .mult import MANY, ONE, Mult, mult_mul


def _pos() -> Pos:
    return field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class KVar:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class KCon:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class KLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class KLam:
    var: str
    body: "KExpr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class KApp:
    fun: "KExpr"
    arg: "KExpr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class KPack:
    body: "KExpr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class KUnpack:
    var: str
    rhs: "KExpr"
    body: "KExpr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class KAlt:
    con: str
    vars: tuple[str, ...]
    body: "KExpr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class KCase:
    mult: Mult
    scrut: "KExpr"
    alts: tuple[KAlt, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class KLet:
    mult: Mult
    var: str
    rhs: "KExpr"
    body: "KExpr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class KLetSig:
    mult: Mult
    var: str
    scheme: S.Scheme
    rhs: "KExpr"
    body: "KExpr"
    pos: Pos = _pos()


KExpr = Union[KVar, KCon, KLit, KLam, KApp, KPack, KUnpack, KCase, KLet, KLetSig]


class Desugarer:
    def __init__(self) -> None:
        self._fresh = count(1)

    def fresh(self) -> str:
        return f"%{next(self._fresh)}"

    def lams(self, params: tuple[str, ...], body: KExpr, pos: Pos) -> KExpr:
        for p in reversed(params):
            body = KLam(self.fresh() if p == "_" else p, body, pos)
        return body

    def expr(self, e: S.Expr) -> KExpr:
        if isinstance(e, S.Var):
            return KVar(e.name, e.pos)
        if isinstance(e, S.Con):
            return KCon(e.name, e.pos)
        if isinstance(e, S.Lit):
            return KLit(e.value, e.pos)
        if isinstance(e, S.Tuple):
            pair = KCon("Pair", e.pos)
            return KApp(KApp(pair, self.expr(e.left), e.pos), self.expr(e.right), e.pos)
        if isinstance(e, S.Lam):
            return self.lams(e.params, self.expr(e.body), e.pos)
        if isinstance(e, S.App):
            return KApp(self.expr(e.fun), self.expr(e.arg), e.pos)
        if isinstance(e, S.BinOp):
            op = KVar(e.op, e.pos)
            return KApp(KApp(op, self.expr(e.left), e.pos), self.expr(e.right), e.pos)
        if isinstance(e, S.Pack):
            return KPack(self.expr(e.body), e.pos)
        if isinstance(e, S.If):
            alts = (
                KAlt("True", (), self.expr(e.then), e.pos),
                KAlt("False", (), self.expr(e.orelse), e.pos),
            )
            return KCase(MANY, self.expr(e.cond), alts, e.pos)
        if isinstance(e, S.Case):
            alts = tuple(self.alt(a.pat, e.mult, self.expr(a.body), a.pos) for a in e.alts)
            return KCase(e.mult, self.expr(e.scrut), alts, e.pos)
        if isinstance(e, S.Let):
            body = self.expr(e.body)
            for b in reversed(e.binds):
                body = self.binding(e.mult, b, body)
            return body
        raise TypeError(f"not an expression: {e!r}")

    def alt(self, pat: S.Pattern, mult: Mult, body: KExpr, pos: Pos) -> KAlt:
        """One alternative of a case at ``mult``; nested patterns become inner cases."""
        if not isinstance(pat, S.PCon):
            raise TypeCheckError("BadPattern", "case alternatives must start with a constructor", pos)
        names = []
        inner: list[tuple[str, S.Pattern]] = []
        for sub in pat.args:
            if isinstance(sub, S.PVar):
                names.append(sub.name)
            elif isinstance(sub, S.PWild):
                names.append(self.fresh())
            else:
                v = self.fresh()
                names.append(v)
                inner.append((v, sub))
        field_mults = _field_mults(pat.con, len(pat.args), pos)
        for v, sub in reversed(inner):
            m = mult_mul(mult, field_mults[names.index(v)])
            body = self.match(v, sub, m, body, pos)
        return KAlt(pat.con, tuple(names), body, pos)

    def match(self, var: str, pat: S.Pattern, mult: Mult, body: KExpr, pos: Pos) -> KExpr:
        """Bind ``pat`` against the variable ``var`` (bound at ``mult``)."""
        if isinstance(pat, S.PVar):
            return KLet(mult, pat.name, KVar(var, pos), body, pos)
        if isinstance(pat, S.PWild):
            return KLet(mult, self.fresh(), KVar(var, pos), body, pos)
        return KCase(mult, KVar(var, pos), (self.alt(pat, mult, body, pos),), pos)

    def binding(self, mult: Mult, b: S.Binding, body: KExpr) -> KExpr:
        if isinstance(b, S.SigBind):
            rhs = self.lams(b.params, self.expr(b.rhs), b.pos)
            return KLetSig(mult, b.name, b.scheme, rhs, body, b.pos)
        if isinstance(b, S.PackBind):
            rhs = self.expr(b.rhs)
            if isinstance(b.pat, S.PVar):
                return KUnpack(b.pat.name, rhs, body, b.pos)
            v = self.fresh()
            return KUnpack(v, rhs, self.match(v, b.pat, ONE, body, b.pos), b.pos)
        rhs = self.lams(b.params, self.expr(b.rhs), b.pos)
        if isinstance(b.pat, S.PVar):
            return KLet(mult, b.pat.name, rhs, body, b.pos)
        if isinstance(b.pat, S.PWild):
            return KLet(mult, self.fresh(), rhs, body, b.pos)
        return KCase(mult, rhs, (self.alt(b.pat, mult, body, b.pos),), b.pos)


def _field_mults(con: str, n: int, pos: Pos) -> list[Mult]:
    from .prelude import constructors
    from .types import TArrow

    cons = constructors()
    if con not in cons:
        raise TypeCheckError("UnboundConstructor", f"unknown constructor {con}", pos)
    t = cons[con].body
    out = []
    while isinstance(t, TArrow):
        out.append(t.mult)
        t = t.res
    if len(out) != n:
        raise TypeCheckError("BadPattern", f"constructor {con} expects {len(out)} fields, got {n}", pos)
    return out


def desugar(e: S.Expr, params: tuple[str, ...] = (), pos: Pos = NOPOS, d: Desugarer | None = None) -> KExpr:
    d = d or Desugarer()
    return d.lams(params, d.expr(e), pos)
