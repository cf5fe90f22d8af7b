"""The explicit-evidence core language.

Evidence for constraints is passed as ordinary values: one token per
atom, ``Ur`` around unrestricted ones, right-nested pairs for several.
Qualified types disappear: a scheme ``forall a. Q => t`` becomes
``forall a. ev(Q) -o t``.

Core programs have an S-expression concrete syntax (see docs/core.md) so
the elaborator's output can be saved and re-checked by ``lint``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from .constraints import LINEARLY, Atom, SimpleConstraint
from .errors import LintError
from .mult import MANY, ONE, Mult, mult_mul
from .types import (
    CExists,
    Constrained,
    TApp,
    TArrow,
    TCon,
    TExists,
    TForall,
    TMeta,
    TToken,
    TVar,
    Type,
    alpha_eq,
    free_vars,
    pair_t,
    spine,
    subst,
    ur_t,
)

# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class CVar:
    name: str
    tyargs: tuple[Type, ...] = ()


@dataclass(frozen=True)
class CCon:
    name: str
    tyargs: tuple[Type, ...] = ()


@dataclass(frozen=True)
class CLit:
    value: int


@dataclass(frozen=True)
class CLam:
    var: str
    mult: Mult
    type: Type
    body: "Term"


@dataclass(frozen=True)
class CApp:
    fun: "Term"
    arg: "Term"


@dataclass(frozen=True)
class CTyLam:
    binders: tuple[str, ...]
    body: "Term"


@dataclass(frozen=True)
class CPack:
    type: CExists
    witnesses: tuple[Type, ...]
    ev: "Term"
    val: "Term"


@dataclass(frozen=True)
class CUnpack:
    skolems: tuple[str, ...]
    ev_var: str
    val_var: str
    rhs: "Term"
    body: "Term"


@dataclass(frozen=True)
class CAlt:
    con: str
    vars: tuple[str, ...]
    body: "Term"


@dataclass(frozen=True)
class CCase:
    mult: Mult
    scrut: "Term"
    alts: tuple[CAlt, ...]


@dataclass(frozen=True)
class CLet:
    mult: Mult
    var: str
    type: Type
    rhs: "Term"
    body: "Term"


@dataclass(frozen=True)
class CLetRec:
    var: str
    type: Type
    rhs: "Term"
    body: "Term"


Term = Union[CVar, CCon, CLit, CLam, CApp, CTyLam, CPack, CUnpack, CCase, CLet, CLetRec]


@dataclass(frozen=True)
class CDef:
    name: str
    type: Type
    term: Term


@dataclass(frozen=True)
class CProgram:
    defs: tuple[CDef, ...]


def term_children(t: Term) -> list[Term]:
    if isinstance(t, CLam):
        return [t.body]
    if isinstance(t, CApp):
        return [t.fun, t.arg]
    if isinstance(t, CTyLam):
        return [t.body]
    if isinstance(t, CPack):
        return [t.ev, t.val]
    if isinstance(t, CUnpack):
        return [t.rhs, t.body]
    if isinstance(t, CCase):
        return [t.scrut] + [a.body for a in t.alts]
    if isinstance(t, (CLet, CLetRec)):
        return [t.rhs, t.body]
    return []


def unit_term() -> Term:
    return CCon("Unit")


def app(f: Term, *args: Term) -> Term:
    for a in args:
        f = CApp(f, a)
    return f


# ---------------------------------------------------------------------------
# types of evidence


UNIT_T = TCon("Unit")


def ev_components(q: SimpleConstraint) -> list[tuple[Mult, Atom]]:
    return q.components()


def ev_type_of(components) -> Type:
    """Evidence type for a list of (multiplicity, atom) components."""
    parts = [TToken(a) if m is ONE else ur_t(TToken(a)) for m, a in components]
    if not parts:
        return UNIT_T
    t = parts[-1]
    for p in reversed(parts[:-1]):
        t = pair_t(p, t)
    return t


def ev_type(q: SimpleConstraint) -> Type:
    return ev_type_of(q.components())


def core_type(t: Type) -> Type:
    """Translate a surface type: packages carry evidence, constrained
    arguments take it."""
    if isinstance(t, TApp):
        return TApp(core_type(t.fun), core_type(t.arg))
    if isinstance(t, TArrow):
        return TArrow(core_type(t.arg), t.mult, core_type(t.res))
    if isinstance(t, TExists):
        return CExists(t.binders, core_type(t.body), ev_type(t.payload))
    if isinstance(t, Constrained):
        return forall(t.binders, TArrow(ev_type(t.assume), ONE, core_type(t.body)))
    if isinstance(t, TMeta):  # pragma: no cover - zonked away before elaboration
        raise LintError("LintType", "unsolved type variable reached the core")
    return t


def forall(binders: tuple[str, ...], body: Type) -> Type:
    return TForall(tuple(binders), body) if binders else body


def scheme_type(binders: tuple[str, ...], q: SimpleConstraint, t: Type) -> Type:
    return forall(binders, TArrow(ev_type(q), ONE, core_type(t)))


# ---------------------------------------------------------------------------
# the core environment: constructors and builtins


@lru_cache(maxsize=None)
def constructor_types() -> dict[str, Type]:
    from .prelude import constructors
    from .types import free_vars_ordered

    out = {}
    for name, sch in constructors().items():
        out[name] = forall(tuple(free_vars_ordered(sch.body)), core_type(sch.body))
    return out


@lru_cache(maxsize=None)
def builtin_types() -> dict[str, Type]:
    from .oracle import builtin_schemes

    out = {name: scheme_type(*s) for name, s in builtin_schemes().items()}
    tok = TToken(LINEARLY)
    out["dupL"] = TArrow(tok, ONE, pair_t(tok, tok))
    out["dropL"] = TArrow(tok, ONE, UNIT_T)
    return out


# ---------------------------------------------------------------------------
# S-expressions


Sexp = Union[str, list]

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s()]+")


def read_sexps(text: str) -> list[Sexp]:
    stack: list[list] = [[]]
    line = 1
    for m in _TOKEN.finditer(text):
        tok = m.group()
        if tok[0].isspace() or tok[0] == ";":
            line += tok.count("\n")
            continue
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise LintError("CoreSyntax", f"line {line}: unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise LintError("CoreSyntax", "unbalanced '(' at end of input")
    return stack[0]


def show_sexp(s: Sexp, indent: int = 0, width: int = 100) -> str:
    flat = _flat(s)
    if isinstance(s, str) or len(flat) + indent <= width:
        return flat
    head = []
    rest = list(s)
    # keep the keyword and short atoms on the first line
    while rest and isinstance(rest[0], str):
        head.append(rest.pop(0))
    while rest and len(head) < 3 and len(_flat(rest[0])) <= 40:
        head.append(_flat(rest.pop(0)))
    pad = " " * (indent + 2)
    lines = ["(" + " ".join(head if head else [])]
    for x in rest:
        lines.append(pad + show_sexp(x, indent + 2, width))
    return "\n".join(lines) + ")"


def _flat(s: Sexp) -> str:
    if isinstance(s, str):
        return s
    return "(" + " ".join(_flat(x) for x in s) + ")"


# -- types ------------------------------------------------------------------


def type_sexp(t: Type) -> Sexp:
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TCon):
        return t.name
    if isinstance(t, TApp):
        head, args = spine(t)
        return [type_sexp(head)] + [type_sexp(a) for a in args]
    if isinstance(t, TArrow):
        return ["->", t.mult.ascii, type_sexp(t.arg), type_sexp(t.res)]
    if isinstance(t, CExists):
        return ["exists", list(t.binders), type_sexp(t.value), type_sexp(t.evidence)]
    if isinstance(t, TForall):
        return ["forall", list(t.binders), type_sexp(t.body)]
    if isinstance(t, TToken):
        return ["tok", t.atom.name] + [type_sexp(a) for a in t.atom.args]
    raise LintError("LintType", f"not a core type: {t!r}")


def _is_con_name(s: str) -> bool:
    return s[:1].isupper()


def sexp_type(s: Sexp) -> Type:
    if isinstance(s, str):
        return TCon(s) if _is_con_name(s) else TVar(s)
    if not s:
        raise LintError("CoreSyntax", "empty type")
    head = s[0]
    if head == "->" and len(s) == 4:
        return TArrow(sexp_type(s[2]), _mult(s[1]), sexp_type(s[3]))
    if head == "exists" and len(s) == 4:
        return CExists(tuple(_names(s[1])), sexp_type(s[2]), sexp_type(s[3]))
    if head == "forall" and len(s) == 3:
        return TForall(tuple(_names(s[1])), sexp_type(s[2]))
    if head == "tok" and len(s) >= 2 and isinstance(s[1], str):
        return TToken(Atom(s[1], tuple(sexp_type(x) for x in s[2:])))
    t = sexp_type(head)
    for a in s[1:]:
        t = TApp(t, sexp_type(a))
    return t


def _mult(s: Sexp) -> Mult:
    if isinstance(s, str):
        try:
            return Mult.from_ascii(s)
        except ValueError:
            pass
    raise LintError("CoreSyntax", f"bad multiplicity {_flat(s)}")


def _names(s: Sexp) -> list[str]:
    if not isinstance(s, list) or not all(isinstance(x, str) for x in s):
        raise LintError("CoreSyntax", f"expected a list of names, got {_flat(s)}")
    return list(s)


# -- terms ------------------------------------------------------------------


def term_sexp(t: Term) -> Sexp:
    if isinstance(t, CVar):
        return ["var", t.name] + [type_sexp(a) for a in t.tyargs]
    if isinstance(t, CCon):
        return ["con", t.name] + [type_sexp(a) for a in t.tyargs]
    if isinstance(t, CLit):
        return str(t.value)
    if isinstance(t, CLam):
        return ["lam", t.var, t.mult.ascii, type_sexp(t.type), term_sexp(t.body)]
    if isinstance(t, CApp):
        return ["app", term_sexp(t.fun), term_sexp(t.arg)]
    if isinstance(t, CTyLam):
        return ["tylam", list(t.binders), term_sexp(t.body)]
    if isinstance(t, CPack):
        return ["pack", type_sexp(t.type), [type_sexp(w) for w in t.witnesses], term_sexp(t.ev), term_sexp(t.val)]
    if isinstance(t, CUnpack):
        return ["unpack", list(t.skolems), t.ev_var, t.val_var, term_sexp(t.rhs), term_sexp(t.body)]
    if isinstance(t, CCase):
        return ["case", t.mult.ascii, term_sexp(t.scrut)] + [
            [a.con, list(a.vars), term_sexp(a.body)] for a in t.alts
        ]
    if isinstance(t, CLet):
        return ["let", t.mult.ascii, t.var, type_sexp(t.type), term_sexp(t.rhs), term_sexp(t.body)]
    if isinstance(t, CLetRec):
        return ["letrec", t.var, type_sexp(t.type), term_sexp(t.rhs), term_sexp(t.body)]
    raise TypeError(t)


_INT = re.compile(r"-?\d+\Z")


def sexp_term(s: Sexp) -> Term:
    if isinstance(s, str):
        if _INT.match(s):
            return CLit(int(s))
        raise LintError("CoreSyntax", f"bare atom {s}; write (var {s})")
    if not s or not isinstance(s[0], str):
        raise LintError("CoreSyntax", f"malformed term {_flat(s)}")
    k, n = s[0], len(s)
    try:
        if k == "var" and n >= 2:
            return CVar(s[1], tuple(sexp_type(x) for x in s[2:]))
        if k == "con" and n >= 2:
            return CCon(s[1], tuple(sexp_type(x) for x in s[2:]))
        if k == "lam" and n == 5:
            return CLam(s[1], _mult(s[2]), sexp_type(s[3]), sexp_term(s[4]))
        if k == "app" and n == 3:
            return CApp(sexp_term(s[1]), sexp_term(s[2]))
        if k == "tylam" and n == 3:
            return CTyLam(tuple(_names(s[1])), sexp_term(s[2]))
        if k == "pack" and n == 5:
            t = sexp_type(s[1])
            if not isinstance(t, CExists):
                raise LintError("CoreSyntax", "pack needs an exists type")
            return CPack(t, tuple(sexp_type(x) for x in s[2]), sexp_term(s[3]), sexp_term(s[4]))
        if k == "unpack" and n == 6:
            return CUnpack(tuple(_names(s[1])), s[2], s[3], sexp_term(s[4]), sexp_term(s[5]))
        if k == "case" and n >= 4:
            alts = tuple(CAlt(a[0], tuple(_names(a[1])), sexp_term(a[2])) for a in s[3:])
            return CCase(_mult(s[1]), sexp_term(s[2]), alts)
        if k == "let" and n == 6:
            return CLet(_mult(s[1]), s[2], sexp_type(s[3]), sexp_term(s[4]), sexp_term(s[5]))
        if k == "letrec" and n == 5:
            return CLetRec(s[1], sexp_type(s[2]), sexp_term(s[3]), sexp_term(s[4]))
    except (IndexError, TypeError):
        pass
    raise LintError("CoreSyntax", f"malformed {k} form: {_flat(s)[:80]}")


def program_sexps(p: CProgram) -> list[Sexp]:
    return [["def", d.name, type_sexp(d.type), term_sexp(d.term)] for d in p.defs]


def show_program(p: CProgram) -> str:
    return "\n\n".join(show_sexp(s) for s in program_sexps(p)) + "\n"


def show_term(t: Term) -> str:
    return show_sexp(term_sexp(t))


def parse_core(text: str) -> CProgram:
    defs = []
    for s in read_sexps(text):
        if not (isinstance(s, list) and len(s) == 4 and s[0] == "def" and isinstance(s[1], str)):
            raise LintError("CoreSyntax", f"expected (def name type term), got {_flat(s)[:60]}")
        defs.append(CDef(s[1], sexp_type(s[2]), sexp_term(s[3])))
    return CProgram(tuple(defs))


def show_type(t: Type) -> str:
    return _flat(type_sexp(t))


# ---------------------------------------------------------------------------
# lint

Usage = dict[str, Mult]


def _add(a: Usage, b: Usage) -> Usage:
    out = dict(a)
    for k, v in b.items():
        out[k] = MANY if k in out else v
    return out


def _scale(p: Mult, a: Usage) -> Usage:
    return dict(a) if p is ONE else {k: MANY for k in a}


def _join(us: list[Usage]) -> Usage:
    """Usage of a case: a variable must be used alike in every branch, or
    it counts as used unrestrictedly."""
    out: Usage = {}
    for k in set().union(*us) if us else ():
        vals = {u.get(k) for u in us}
        out[k] = vals.pop() if len(vals) == 1 else MANY
    return out


def _fail(kind: str, msg: str) -> LintError:
    return LintError(kind, msg)


def instantiate(t: Type, tyargs: tuple[Type, ...], what: str) -> Type:
    if not tyargs:
        return t
    if not isinstance(t, TForall) or len(t.binders) != len(tyargs):
        n = len(t.binders) if isinstance(t, TForall) else 0
        raise _fail("LintType", f"{what} takes {n} type arguments, given {len(tyargs)}")
    return subst(t.body, dict(zip(t.binders, tyargs)))


def match_type(pat: Type, t: Type, vars: set[str], sub: dict[str, Type]) -> bool:
    if isinstance(pat, TVar) and pat.name in vars:
        if pat.name in sub:
            return alpha_eq(sub[pat.name], t)
        sub[pat.name] = t
        return True
    if isinstance(pat, TApp) and isinstance(t, TApp):
        return match_type(pat.fun, t.fun, vars, sub) and match_type(pat.arg, t.arg, vars, sub)
    return pat == t


class Linter:
    def __init__(self, globals_: dict[str, Type]):
        self.globals = globals_
        self.cons = constructor_types()
        self._fresh = 0

    def fresh(self, base: str) -> str:
        self._fresh += 1
        return f"{base.split('#')[0]}#k{self._fresh}"

    def eq(self, want: Type, got: Type, where: str) -> None:
        if not alpha_eq(want, got):
            raise _fail("LintType", f"{where}: expected {show_type(want)}, got {show_type(got)}")

    def bind_ok(self, x: str, m: Mult, usage: Usage) -> None:
        if m is ONE and usage.get(x) is not ONE:
            actual = "unused" if x not in usage else "used more than once"
            raise _fail("LintLinearity", f"linear variable {x} is {actual}")

    def lint(self, t: Term, env: dict[str, tuple[Mult, Type]]) -> tuple[Type, Usage]:
        if isinstance(t, CVar):
            if t.name in env:
                _, ty = env[t.name]
                return instantiate(ty, t.tyargs, t.name), {t.name: ONE}
            if t.name in self.globals:
                return instantiate(self.globals[t.name], t.tyargs, t.name), {}
            raise _fail("LintUnbound", f"unbound variable {t.name}")
        if isinstance(t, CCon):
            if t.name not in self.cons:
                raise _fail("LintUnbound", f"unknown constructor {t.name}")
            return instantiate(self.cons[t.name], t.tyargs, t.name), {}
        if isinstance(t, CLit):
            return TCon("Int"), {}
        if isinstance(t, CLam):
            inner = dict(env)
            inner[t.var] = (t.mult, t.type)
            bt, bu = self.lint(t.body, inner)
            self.bind_ok(t.var, t.mult, bu)
            bu.pop(t.var, None)
            return TArrow(t.type, t.mult, bt), bu
        if isinstance(t, CApp):
            ft, fu = self.lint(t.fun, env)
            if not isinstance(ft, TArrow):
                raise _fail("LintType", f"applying a non-function of type {show_type(ft)}")
            at, au = self.lint(t.arg, env)
            self.eq(ft.arg, at, "argument")
            return ft.res, _add(fu, _scale(ft.mult, au))
        if isinstance(t, CTyLam):
            bt, bu = self.lint(t.body, env)
            for x, (_, ty) in env.items():
                if x in bu and set(t.binders) & free_vars(ty):
                    raise _fail("LintType", f"type abstraction over a variable free in the type of {x}")
            return TForall(t.binders, bt), bu
        if isinstance(t, CPack):
            ex = t.type
            if len(ex.binders) != len(t.witnesses):
                raise _fail("LintType", "pack: wrong number of witness types")
            sub = dict(zip(ex.binders, t.witnesses))
            et, eu = self.lint(t.ev, env)
            vt, vu = self.lint(t.val, env)
            self.eq(subst(ex.evidence, sub), et, "pack evidence")
            self.eq(subst(ex.value, sub), vt, "pack value")
            return ex, _add(eu, vu)
        if isinstance(t, CUnpack):
            rt, ru = self.lint(t.rhs, env)
            if not isinstance(rt, CExists) or len(rt.binders) != len(t.skolems):
                raise _fail("LintType", f"unpack of a non-package of type {show_type(rt)}")
            sub = {b: TVar(s) for b, s in zip(rt.binders, t.skolems)}
            inner = dict(env)
            inner[t.ev_var] = (ONE, subst(rt.evidence, sub))
            inner[t.val_var] = (ONE, subst(rt.value, sub))
            bt, bu = self.lint(t.body, inner)
            self.bind_ok(t.ev_var, ONE, bu)
            self.bind_ok(t.val_var, ONE, bu)
            if set(t.skolems) & free_vars(bt):
                raise _fail("LintType", f"unpacked type variable escapes in {show_type(bt)}")
            bu.pop(t.ev_var)
            bu.pop(t.val_var)
            return bt, _add(ru, bu)
        if isinstance(t, CCase):
            return self._case(t, env)
        if isinstance(t, CLet):
            rt, ru = self.lint(t.rhs, env)
            self.eq(t.type, rt, f"let {t.var}")
            inner = dict(env)
            inner[t.var] = (t.mult, t.type)
            bt, bu = self.lint(t.body, inner)
            self.bind_ok(t.var, t.mult, bu)
            bu.pop(t.var, None)
            return bt, _add(_scale(t.mult, ru), bu)
        if isinstance(t, CLetRec):
            inner = dict(env)
            inner[t.var] = (MANY, t.type)
            rt, ru = self.lint(t.rhs, inner)
            self.eq(t.type, rt, f"letrec {t.var}")
            ru.pop(t.var, None)
            bt, bu = self.lint(t.body, inner)
            bu.pop(t.var, None)
            return bt, _add(_scale(MANY, ru), bu)
        raise TypeError(t)

    def _case(self, t: CCase, env) -> tuple[Type, Usage]:
        from .prelude import DATATYPES

        st, su = self.lint(t.scrut, env)
        head, _ = spine(st)
        if not isinstance(head, TCon) or head.name not in DATATYPES:
            raise _fail("LintType", f"case on a value of type {show_type(st)}")
        family = DATATYPES[head.name]
        if sorted(a.con for a in t.alts) != sorted(family):
            raise _fail("LintType", f"case alternatives must be exactly {', '.join(family)}")
        result: Type | None = None
        usages = []
        for a in t.alts:
            ct = self.cons[a.con]
            binders = ct.binders if isinstance(ct, TForall) else ()
            body = ct.body if isinstance(ct, TForall) else ct
            fields = []
            while isinstance(body, TArrow):
                fields.append((body.mult, body.arg))
                body = body.res
            sub: dict[str, Type] = {}
            if not match_type(body, st, set(binders), sub):
                raise _fail("LintType", f"constructor {a.con} does not build {show_type(st)}")
            if len(fields) != len(a.vars):
                raise _fail("LintType", f"constructor {a.con} has {len(fields)} fields")
            inner = dict(env)
            mults = []
            for v, (m, ft) in zip(a.vars, fields):
                bm = mult_mul(t.mult, m)
                mults.append(bm)
                inner[v] = (bm, subst(ft, sub))
            bt, bu = self.lint(a.body, inner)
            for v, m in zip(a.vars, mults):
                self.bind_ok(v, m, bu)
                bu.pop(v, None)
            if result is None:
                result = bt
            else:
                self.eq(result, bt, f"branch {a.con}")
            usages.append(bu)
        assert result is not None
        return result, _add(_scale(t.mult, su), _join(usages))


def program_globals(p: CProgram) -> dict[str, Type]:
    g = dict(builtin_types())
    for d in p.defs:
        g[d.name] = d.type
    return g


def lint_program(p: CProgram) -> dict[str, Type]:
    """Check every definition against its declared type; return the types."""
    g = program_globals(p)
    out = {}
    for d in p.defs:
        try:
            t, u = Linter(g).lint(d.term, {})
            Linter(g).eq(d.type, t, f"definition {d.name}")
        except LintError as e:
            raise LintError(e.kind, f"in {d.name}: {e.message}") from None
        assert not u, u
        out[d.name] = t
    return out


def lint_term(t: Term, env: dict[str, tuple[Mult, Type]] | None = None,
              globals_: dict[str, Type] | None = None) -> Type:
    """Lint a standalone term; every linear variable of ``env`` must be used once."""
    env = env or {}
    ty, usage = Linter(globals_ if globals_ is not None else builtin_types()).lint(t, env)
    for x, (m, _) in env.items():
        Linter({}).bind_ok(x, m, usage)
    return ty
