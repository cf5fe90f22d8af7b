"""The type oracle: constraint-free typing derivations and usage checking.

Inference is bidirectional.  Signatures, constrained argument types and
package types are pushed inward; lambdas and ``pack`` are only checked,
never inferred.  Unification solves monotype instantiations; there is no
let-generalisation.  Every node records what constraint generation and
elaboration later need: instantiations, arrow multiplicities, binder
multiplicities, the usage map of the subterm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import count

from . import syntax as S
from .constraints import Atom, SimpleConstraint
from .errors import NOPOS, LinearityError, Pos, TypeCheckError
from .kernel import (
    Desugarer,
    KApp,
    KCase,
    KCon,
    KExpr,
    KLam,
    KLet,
    KLetSig,
    KLit,
    KPack,
    KUnpack,
    KVar,
)
from .mult import MANY, ONE, Mult, mult_mul
from .prelude import DATATYPES, TYCONS, constructors, expand_synonyms, prelude
from .types import (
    BOOL,
    INT,
    UNIT,
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
    app,
    free_vars,
    free_vars_ordered,
    metas,
    render,
    spine,
    subst,
    subst_metas,
)

Usage = dict[str, Mult]


def u_add(a: Usage, b: Usage) -> Usage:
    out = dict(a)
    for k, v in b.items():
        out[k] = MANY if k in out else v
    return out


def u_scale(p: Mult, a: Usage) -> Usage:
    return dict(a) if p is ONE else {k: MANY for k in a}


def u_drop(a: Usage, *names: str) -> Usage:
    return {k: v for k, v in a.items() if k not in names}


# ---------------------------------------------------------------------------
# derivations


@dataclass
class Node:
    type: Type
    usage: Usage
    pos: Pos
    path: str = ""

    kind = "?"

    def children(self) -> list["Node"]:
        return []


Component = tuple[Mult, Atom]


@dataclass
class DVar(Node):
    name: str = ""
    role: str = "local"  # local, global, builtin, con
    qualified: bool = False
    binders: tuple[str, ...] = ()
    inst: tuple[Type, ...] = ()
    wanted: tuple[Component, ...] = ()
    kind = "Var"


@dataclass
class DLit(Node):
    value: int = 0
    kind = "Lit"


@dataclass
class DAbs(Node):
    var: str = ""
    mult: Mult = ONE
    arg_type: Type = UNIT
    body: Node | None = None
    kind = "Abs"

    def children(self):
        return [self.body]


@dataclass
class ArgImpl:
    """A constrained argument ``forall p. Q =o t``: skolems and assumptions."""

    skolems: tuple[str, ...]
    assume: tuple[Component, ...]


@dataclass
class DApp(Node):
    fun: Node | None = None
    arg: Node | None = None
    mult: Mult = ONE
    arg_impl: ArgImpl | None = None
    kind = "App"

    def children(self):
        return [self.fun, self.arg]


@dataclass
class DPack(Node):
    body: Node | None = None
    inst: tuple[Type, ...] = ()
    payload: tuple[Component, ...] = ()
    kind = "Pack"

    def children(self):
        return [self.body]


@dataclass
class DUnpack(Node):
    var: str = ""
    rhs: Node | None = None
    body: Node | None = None
    skolems: tuple[str, ...] = ()
    var_type: Type = UNIT
    payload: tuple[Component, ...] = ()
    kind = "Unpack"

    def children(self):
        return [self.rhs, self.body]


@dataclass
class DAlt:
    con: str
    vars: tuple[str, ...]
    var_mults: tuple[Mult, ...]
    var_types: tuple[Type, ...]
    body: Node
    pos: Pos = NOPOS


@dataclass
class DCase(Node):
    mult: Mult = ONE
    scrut: Node | None = None
    alts: list[DAlt] = field(default_factory=list)
    kind = "Case"

    def children(self):
        return [self.scrut] + [a.body for a in self.alts]


@dataclass
class DLet(Node):
    mult: Mult = ONE
    var: str = ""
    var_type: Type = UNIT
    rhs: Node | None = None
    body: Node | None = None
    kind = "Let"

    def children(self):
        return [self.rhs, self.body]


@dataclass
class DLetSig(Node):
    mult: Mult = ONE
    var: str = ""
    binders: tuple[str, ...] = ()
    assume: SimpleConstraint = field(default_factory=SimpleConstraint)
    sig_type: Type = UNIT
    recursive: bool = False
    rhs: Node | None = None
    body: Node | None = None
    kind = "LetSig"

    def children(self):
        return [self.rhs, self.body]


@dataclass
class BindingDerivation:
    """A top-level binding: its scheme and the derivation of its body."""

    name: str
    binders: tuple[str, ...]
    assume: SimpleConstraint
    type: Type
    body: Node
    is_main: bool
    pos: Pos = NOPOS

    def to_json(self) -> dict:
        return {
            "binding": self.name,
            "scheme": {
                "binders": list(self.binders),
                "assume": self.assume.to_json(),
                "type": render(self.type),
            },
            "derivation": node_to_json(self.body),
        }


def node_to_json(n: Node) -> dict:
    out: dict = {"kind": n.kind, "path": n.path, "type": render(n.type)}
    if isinstance(n, DVar):
        out["name"] = n.name
        out["role"] = n.role
        if n.binders:
            out["instantiation"] = {b: render(t) for b, t in zip(n.binders, n.inst)}
        if n.wanted:
            out["wanted"] = [f"{m.ascii}.{a.render()}" for m, a in n.wanted]
    elif isinstance(n, DLit):
        out["value"] = n.value
    elif isinstance(n, DAbs):
        out["var"] = n.var
        out["mult"] = n.mult.ascii
    elif isinstance(n, DApp):
        out["mult"] = n.mult.ascii
        if n.arg_impl:
            out["arg_assume"] = [f"{m.ascii}.{a.render()}" for m, a in n.arg_impl.assume]
    elif isinstance(n, DPack):
        out["payload"] = [f"{m.ascii}.{a.render()}" for m, a in n.payload]
    elif isinstance(n, DUnpack):
        out["var"] = n.var
        out["skolems"] = list(n.skolems)
        out["payload"] = [f"{m.ascii}.{a.render()}" for m, a in n.payload]
    elif isinstance(n, DCase):
        out["mult"] = n.mult.ascii
        out["alts"] = [
            {"con": a.con, "vars": list(a.vars), "mults": [m.ascii for m in a.var_mults]} for a in n.alts
        ]
    elif isinstance(n, (DLet, DLetSig)):
        out["var"] = n.var
        out["mult"] = n.mult.ascii
        if isinstance(n, DLetSig):
            out["assume"] = n.assume.to_json()
    out["usage"] = {k: v.ascii for k, v in sorted(n.usage.items())}
    kids = [c for c in n.children() if c is not None]
    if kids:
        out["children"] = [node_to_json(c) for c in kids]
    return out


def walk(n: Node):
    yield n
    for c in n.children():
        if c is not None:
            yield from walk(c)


# ---------------------------------------------------------------------------
# environment


@dataclass(frozen=True)
class Entry:
    mult: Mult
    binders: tuple[str, ...]
    assume: SimpleConstraint
    type: Type
    role: str  # local, global, builtin, con
    qualified: bool


def components(q: SimpleConstraint) -> tuple[Component, ...]:
    return tuple(q.components())


def subst_components(cs, sub: dict[str, Type]) -> tuple[Component, ...]:
    return tuple((m, a.map_types(lambda t: subst(t, sub))) for m, a in cs)


class Oracle:
    """Type inference for one program."""

    def __init__(self) -> None:
        self.metas = count(1)
        self.skolems = count(1)
        self.sub: dict[int, Type] = {}
        self.givens: list[Atom] = []

    # -- metas, skolems, zonking ------------------------------------------

    def meta(self) -> TMeta:
        return TMeta(next(self.metas))

    def skolem(self, base: str) -> str:
        return f"{base.split('#')[0]}#{next(self.skolems)}"

    def zonk(self, t: Type) -> Type:
        return subst_metas(t, self.sub)

    def zonk_atom(self, a: Atom) -> Atom:
        return a.map_types(self.zonk)

    # -- unification ------------------------------------------------------

    def unify(self, a: Type, b: Type, pos: Pos) -> None:
        try:
            self._unify(a, b)
        except _Mismatch:
            raise TypeCheckError(
                "UnificationFailure",
                f"cannot match {render(self.zonk(a))} with {render(self.zonk(b))}", pos) from None

    def _unify(self, a: Type, b: Type) -> None:
        a, b = self._walk(a), self._walk(b)
        if a == b:
            return
        if isinstance(a, TMeta):
            self._bind(a, b)
            return
        if isinstance(b, TMeta):
            self._bind(b, a)
            return
        if isinstance(a, TApp) and isinstance(b, TApp):
            self._unify(a.fun, b.fun)
            self._unify(a.arg, b.arg)
            return
        if isinstance(a, TArrow) and isinstance(b, TArrow):
            if a.mult is not b.mult:
                raise _Mismatch()
            self._unify(a.arg, b.arg)
            self._unify(a.res, b.res)
            return
        if isinstance(a, TExists) and isinstance(b, TExists):
            self._unify_binder(a.binders, b.binders, (a.body,), (b.body,), a.payload, b.payload)
            return
        if isinstance(a, Constrained) and isinstance(b, Constrained):
            self._unify_binder(a.binders, b.binders, (a.body,), (b.body,), a.assume, b.assume)
            return
        raise _Mismatch()

    def _unify_binder(self, bs1, bs2, ts1, ts2, q1: SimpleConstraint, q2: SimpleConstraint) -> None:
        if len(bs1) != len(bs2):
            raise _Mismatch()
        common = {}
        for x, y in zip(bs1, bs2):
            common[x] = common[y] = TVar(self.skolem("u"))
        s1 = {x: common[x] for x in bs1}
        s2 = {y: common[y] for y in bs2}
        for t1, t2 in zip(ts1, ts2):
            self._unify(subst(t1, s1), subst(t2, s2))
        c1 = subst_components(q1.components(), s1)
        c2 = subst_components(q2.components(), s2)
        if len(c1) != len(c2):
            raise _Mismatch()
        for (m1, a1), (m2, a2) in zip(c1, c2):
            if m1 is not m2 or a1.name != a2.name or len(a1.args) != len(a2.args):
                raise _Mismatch()
            for x, y in zip(a1.args, a2.args):
                self._unify(x, y)

    def _walk(self, t: Type) -> Type:
        while isinstance(t, TMeta) and t.id in self.sub:
            t = self.sub[t.id]
        return t

    def _bind(self, m: TMeta, t: Type) -> None:
        if m.id in metas(self.zonk(t)):
            raise _Mismatch()
        self.sub[m.id] = t

    # -- scheme resolution ------------------------------------------------

    def resolve_scheme(
        self, sch: S.Scheme, scope: dict[str, Type], pos: Pos, rename: bool
    ) -> tuple[tuple[str, ...], SimpleConstraint, Type, dict[str, Type]]:
        """Quantify a written scheme.  Returns binders, assumption, type and the
        mapping from written binder names to the (possibly renamed) binders."""
        body = expand_synonyms(sch.body)
        q = sch.assume.map_types(expand_synonyms)
        written: list[str] = list(sch.binders)
        every = free_vars_ordered(_scheme_carrier(q, body))
        for v in every:
            if v not in written and v not in scope:
                written.append(v)
        ren: dict[str, Type] = {}
        binders = []
        for v in written:
            name = self.skolem(v) if rename else v
            ren[v] = TVar(name)
            binders.append(name)
        sub = dict(scope)
        sub.update(ren)
        body = subst(body, sub)
        q = q.map_types(lambda t: subst(t, sub))
        self.check_wf(body, pos)
        return tuple(binders), q, body, ren

    def check_wf(self, t: Type, pos: Pos) -> None:
        head, args = spine(t)
        if isinstance(head, TCon):
            if head.name not in TYCONS:
                raise TypeCheckError("UnknownType", f"unknown type constructor {head.name}", pos)
        for a in args:
            self.check_wf(a, pos)
        if isinstance(t, TArrow):
            self.check_wf(t.arg, pos)
            self.check_wf(t.res, pos)
        elif isinstance(t, (TExists, Constrained)):
            self.check_wf(t.body, pos)

    # -- instantiation ----------------------------------------------------

    def instantiate(self, e: Entry) -> tuple[tuple[Type, ...], Type, tuple[Component, ...]]:
        inst = tuple(self.meta() for _ in e.binders)
        sub = dict(zip(e.binders, inst))
        t = subst(e.type, sub)
        return inst, t, subst_components(e.assume.components(), sub)

    # -- the judgement ----------------------------------------------------

    def infer(self, e: KExpr, env: dict[str, Entry], scope: dict[str, Type]) -> Node:
        return self._go(e, env, scope, None)

    def check(self, e: KExpr, env: dict[str, Entry], scope: dict[str, Type], expected: Type) -> Node:
        n = self._go(e, env, scope, expected)
        return n

    def _go(self, e: KExpr, env, scope, expected: Type | None) -> Node:
        if isinstance(e, (KVar, KCon, KApp)):
            return self._spine(e, env, scope, expected)
        if isinstance(e, KLit):
            n = DLit(INT, {}, e.pos, value=e.value)
            return self._expect(n, expected)
        if isinstance(e, KLam):
            return self._lam(e, env, scope, expected)
        if isinstance(e, KPack):
            return self._pack(e, env, scope, expected)
        if isinstance(e, KUnpack):
            return self._unpack(e, env, scope, expected)
        if isinstance(e, KCase):
            return self._case(e, env, scope, expected)
        if isinstance(e, KLet):
            return self._let(e, env, scope, expected)
        if isinstance(e, KLetSig):
            return self._letsig(e, env, scope, expected)
        raise TypeError(e)

    def _expect(self, n: Node, expected: Type | None) -> Node:
        if expected is not None:
            self.unify(n.type, expected, n.pos)
        return n

    def _var(self, e: KVar | KCon, env: dict[str, Entry]) -> DVar:
        if isinstance(e, KCon):
            cons = constructors()
            if e.name not in cons:
                raise TypeCheckError("UnboundConstructor", f"unknown constructor {e.name}", e.pos)
            sch = cons[e.name]
            binders = tuple(free_vars_ordered(sch.body))
            entry = Entry(MANY, binders, sch.assume, sch.body, "con", False)
        else:
            if e.name not in env:
                raise TypeCheckError("UnboundVariable", f"variable {e.name} is not in scope", e.pos)
            entry = env[e.name]
        inst, t, wanted = self.instantiate(entry)
        usage = {e.name: ONE} if entry.role == "local" else {}
        return DVar(t, usage, e.pos, name=e.name, role=entry.role, qualified=entry.qualified,
                    binders=entry.binders, inst=inst, wanted=wanted)

    def _spine(self, e: KExpr, env, scope, expected: Type | None) -> Node:
        args: list[KExpr] = []
        head = e
        while isinstance(head, KApp):
            args.append(head.arg)
            head = head.fun
        args.reverse()
        if isinstance(head, (KVar, KCon)):
            fn: Node = self._var(head, env)
        else:
            fn = self.infer(head, env, scope)
        # peel the arrows first so the expected result can inform the arguments
        arrows: list[TArrow] = []
        t = self.zonk(fn.type)
        for a in args:
            if not isinstance(t, TArrow):
                if isinstance(t, TMeta):
                    raise TypeCheckError(
                        "UnknownFunctionType", "cannot apply a value whose type is not yet known",
                        getattr(a, "pos", NOPOS))
                raise TypeCheckError(
                    "UnificationFailure", f"{render(t)} is not a function type", getattr(a, "pos", NOPOS))
            arrows.append(t)
            t = self.zonk(t.res)
        if expected is not None:
            self.unify(t, expected, getattr(e, "pos", NOPOS))
        node = fn
        for a, arrow in zip(args, arrows):
            arg_impl = None
            arg_t = self.zonk(arrow.arg)
            if isinstance(arg_t, Constrained):
                sks = tuple(self.skolem(b) for b in arg_t.binders)
                sub = {b: TVar(s) for b, s in zip(arg_t.binders, sks)}
                assume = subst_components(arg_t.assume.components(), sub)
                inner = subst(arg_t.body, sub)
                self.givens.extend(a2 for _, a2 in assume)
                arg_node = self.check(a, env, scope, inner)
                del self.givens[len(self.givens) - len(assume):]
                arg_impl = ArgImpl(sks, assume)
            else:
                arg_node = self.check(a, env, scope, arg_t)
            usage = u_add(node.usage, u_scale(arrow.mult, arg_node.usage))
            node = DApp(arrow.res, usage, getattr(a, "pos", node.pos), fun=node, arg=arg_node,
                        mult=arrow.mult, arg_impl=arg_impl)
            if arg_impl:
                self._no_escape(node.type, arg_impl.skolems, node.pos)
        if isinstance(fn, DVar):
            self._improve(fn)
        return node

    def _improve(self, v: DVar) -> None:
        """``Slices n l r``: l and r determine n.  Look the missing n up among
        the in-scope assumptions."""
        for _, atom in v.wanted:
            if atom.name != "Slices" or len(atom.args) != 3:
                continue
            n, l, r = (self.zonk(x) for x in atom.args)
            if not isinstance(n, TMeta) or metas(l) or metas(r):
                continue
            for g in reversed(self.givens):
                g = self.zonk_atom(g)
                if g.name == "Slices" and len(g.args) == 3 and g.args[1] == l and g.args[2] == r:
                    self.unify(n, g.args[0], v.pos)
                    break

    def _no_escape(self, t: Type, skolems: tuple[str, ...], pos: Pos) -> None:
        leaked = set(skolems) & free_vars(self.zonk(t))
        if leaked:
            raise TypeCheckError(
                "SkolemEscape", f"type variable {sorted(leaked)[0]} escapes its scope in {render(self.zonk(t))}",
                pos)

    def _lam(self, e: KLam, env, scope, expected: Type | None) -> Node:
        if expected is None or not isinstance(self.zonk(expected), TArrow):
            shown = "" if expected is None else f" against {render(self.zonk(expected))}"
            raise TypeCheckError(
                "CannotInferLambda", f"lambda needs a known function type{shown}", e.pos)
        arrow = self.zonk(expected)
        assert isinstance(arrow, TArrow)
        arg = arrow.arg
        if isinstance(arg, Constrained):
            entry = Entry(arrow.mult, arg.binders, arg.assume, arg.body, "local", True)
        else:
            entry = Entry(arrow.mult, (), SimpleConstraint(), arg, "local", False)
        inner = dict(env)
        inner[e.var] = entry
        body = self.check(e.body, inner, scope, arrow.res)
        return DAbs(arrow, u_drop(body.usage, e.var), e.pos, var=e.var, mult=arrow.mult, arg_type=arg,
                    body=body)

    def _pack(self, e: KPack, env, scope, expected: Type | None) -> Node:
        ex = None if expected is None else self.zonk(expected)
        if not isinstance(ex, TExists):
            shown = "unknown" if ex is None else render(ex)
            raise TypeCheckError("CannotInferPack", f"pack needs a known package type, found {shown}", e.pos)
        inst = tuple(self.meta() for _ in ex.binders)
        sub = dict(zip(ex.binders, inst))
        body = self.check(e.body, env, scope, subst(ex.body, sub))
        payload = subst_components(ex.payload.components(), sub)
        return DPack(ex, body.usage, e.pos, body=body, inst=inst, payload=payload)

    def _unpack(self, e: KUnpack, env, scope, expected: Type | None) -> Node:
        rhs = self.infer(e.rhs, env, scope)
        pt = self.zonk(rhs.type)
        if not isinstance(pt, TExists):
            raise TypeCheckError(
                "UnificationFailure", f"let pack expects a package, found {render(pt)}", e.pos)
        sks = tuple(self.skolem(b) for b in pt.binders)
        sub = {b: TVar(s) for b, s in zip(pt.binders, sks)}
        var_t = subst(pt.body, sub)
        payload = subst_components(pt.payload.components(), sub)
        inner_scope = dict(scope)
        inner_scope.update(sub)
        inner = dict(env)
        inner[e.var] = Entry(ONE, (), SimpleConstraint(), var_t, "local", False)
        self.givens.extend(a for _, a in payload)
        body = self._go(e.body, inner, inner_scope, expected)
        del self.givens[len(self.givens) - len(payload):]
        self._no_escape(body.type, sks, e.pos)
        usage = u_add(rhs.usage, u_drop(body.usage, e.var))
        return DUnpack(body.type, usage, e.pos, var=e.var, rhs=rhs, body=body, skolems=sks, var_type=var_t,
                       payload=payload)

    def _case(self, e: KCase, env, scope, expected: Type | None) -> Node:
        scrut = self.infer(e.scrut, env, scope)
        cons = constructors()
        first = e.alts[0].con
        if first not in cons:
            raise TypeCheckError("UnboundConstructor", f"unknown constructor {first}", e.alts[0].pos)
        tycon = spine(_result(cons[first].body))[0]
        assert isinstance(tycon, TCon)
        family = DATATYPES[tycon.name]
        seen = [a.con for a in e.alts]
        if sorted(seen) != sorted(family) or len(set(seen)) != len(seen):
            raise TypeCheckError(
                "NonExhaustiveCase",
                f"case must match each of {', '.join(family)} exactly once", e.pos)
        params = tuple(free_vars_ordered(cons[first].body))
        targs = tuple(self.meta() for _ in params)
        self.unify(scrut.type, app(tycon, *targs), e.scrut.pos if hasattr(e.scrut, "pos") else e.pos)
        result = expected
        alts: list[DAlt] = []
        usages: list[Usage] = []
        for a in e.alts:
            sch = cons[a.con]
            sub = dict(zip(free_vars_ordered(sch.body), targs))
            t = sch.body
            fields: list[tuple[Mult, Type]] = []
            while isinstance(t, TArrow):
                fields.append((t.mult, subst(t.arg, sub)))
                t = t.res
            if len(fields) != len(a.vars):
                raise TypeCheckError(
                    "BadPattern", f"constructor {a.con} expects {len(fields)} fields", a.pos)
            inner = dict(env)
            mults = []
            for v, (m, ft) in zip(a.vars, fields):
                bm = mult_mul(e.mult, m)
                mults.append(bm)
                inner[v] = Entry(bm, (), SimpleConstraint(), ft, "local", False)
            body = self._go(a.body, inner, scope, result)
            if result is None:
                result = body.type
            alts.append(DAlt(a.con, a.vars, tuple(mults), tuple(ft for _, ft in fields), body, a.pos))
            usages.append(u_drop(body.usage, *a.vars))
        joined: Usage = {}
        for u in usages:
            for k, v in u.items():
                if k in joined and joined[k] is not v:
                    joined[k] = MANY
                else:
                    joined.setdefault(k, v)
        for k in joined:
            if any(k not in u for u in usages):
                joined[k] = MANY
        usage = u_add(u_scale(e.mult, scrut.usage), joined)
        return DCase(result, usage, e.pos, mult=e.mult, scrut=scrut, alts=alts)

    def _let(self, e: KLet, env, scope, expected: Type | None) -> Node:
        rhs = self.infer(e.rhs, env, scope)
        inner = dict(env)
        inner[e.var] = Entry(e.mult, (), SimpleConstraint(), rhs.type, "local", False)
        body = self._go(e.body, inner, scope, expected)
        usage = u_add(u_scale(e.mult, rhs.usage), u_drop(body.usage, e.var))
        return DLet(body.type, usage, e.pos, mult=e.mult, var=e.var, var_type=rhs.type, rhs=rhs, body=body)

    def _letsig(self, e: KLetSig, env, scope, expected: Type | None) -> Node:
        binders, q, t, ren = self.resolve_scheme(e.scheme, scope, e.pos, rename=True)
        entry = Entry(e.mult, binders, q, t, "local", True)
        rhs_env = dict(env)
        recursive = e.mult is MANY
        if recursive:
            rhs_env[e.var] = entry
        rhs_scope = dict(scope)
        rhs_scope.update(ren)
        self.givens.extend(a for _, a in q.components())
        rhs = self.check(e.rhs, rhs_env, rhs_scope, t)
        del self.givens[len(self.givens) - len(q.components()):]
        inner = dict(env)
        inner[e.var] = entry
        body = self._go(e.body, inner, scope, expected)
        rhs_usage = u_drop(rhs.usage, e.var) if recursive else rhs.usage
        usage = u_add(u_scale(e.mult, rhs_usage), u_drop(body.usage, e.var))
        return DLetSig(body.type, usage, e.pos, mult=e.mult, var=e.var, binders=binders, assume=q, sig_type=t,
                       recursive=recursive, rhs=rhs, body=body)

    # -- finishing --------------------------------------------------------

    def finish(self, root: Node) -> None:
        """Zonk every node; default metas that only occur in types to ``()``."""
        for n in walk(root):
            for _, a in _node_components(n):
                for t in a.args:
                    left = metas(self.zonk(t))
                    if left:
                        raise TypeCheckError(
                            "AmbiguousInstantiation",
                            f"cannot determine the type argument of {self.zonk_atom(a).render()}", n.pos)
        for n in walk(root):
            for m in sorted(_node_metas(n, self)):
                self.sub.setdefault(m, UNIT)
        for n in walk(root):
            _zonk_node(n, self.zonk)


class _Mismatch(Exception):
    pass


def _result(t: Type) -> Type:
    while isinstance(t, TArrow):
        t = t.res
    return t


def _scheme_carrier(q: SimpleConstraint, body: Type) -> Type:
    """A type mentioning the atoms' arguments before the body, used only to
    order the implicitly quantified variables."""
    t: Type = body
    for a in reversed(q.atoms()):
        for x in reversed(a.args):
            t = TApp(TApp(TCon("%"), x), t)
    return t


def _node_components(n: Node) -> list[Component]:
    if isinstance(n, DVar):
        return list(n.wanted)
    if isinstance(n, (DPack, DUnpack)):
        return list(n.payload)
    if isinstance(n, DApp) and n.arg_impl:
        return list(n.arg_impl.assume)
    return []


def _node_metas(n: Node, o: Oracle) -> set[int]:
    out = metas(o.zonk(n.type))
    if isinstance(n, DVar):
        for t in n.inst:
            out |= metas(o.zonk(t))
    if isinstance(n, DPack):
        for t in n.inst:
            out |= metas(o.zonk(t))
    if isinstance(n, (DLet, DUnpack)):
        out |= metas(o.zonk(n.var_type))
    if isinstance(n, DAbs):
        out |= metas(o.zonk(n.arg_type))
    if isinstance(n, DCase):
        for a in n.alts:
            for t in a.var_types:
                out |= metas(o.zonk(t))
    return out


def _zonk_node(n: Node, z) -> None:
    n.type = z(n.type)
    za = lambda cs: tuple((m, a.map_types(z)) for m, a in cs)  # noqa: E731
    if isinstance(n, DVar):
        n.inst = tuple(z(t) for t in n.inst)
        n.wanted = za(n.wanted)
    elif isinstance(n, DPack):
        n.inst = tuple(z(t) for t in n.inst)
        n.payload = za(n.payload)
    elif isinstance(n, DUnpack):
        n.var_type = z(n.var_type)
        n.payload = za(n.payload)
    elif isinstance(n, DLet):
        n.var_type = z(n.var_type)
    elif isinstance(n, DAbs):
        n.arg_type = z(n.arg_type)
    elif isinstance(n, DApp) and n.arg_impl:
        n.arg_impl.assume = za(n.arg_impl.assume)
    elif isinstance(n, DCase):
        for a in n.alts:
            a.var_types = tuple(z(t) for t in a.var_types)


def assign_paths(n: Node, path: str = "r") -> None:
    n.path = path
    for i, c in enumerate(n.children()):
        if c is not None:
            assign_paths(c, f"{path}.{i}")


# ---------------------------------------------------------------------------
# whole programs


@lru_cache(maxsize=None)
def builtin_schemes() -> dict[str, tuple[tuple[str, ...], SimpleConstraint, Type]]:
    """Resolved prelude schemes: binders, assumption, type."""
    o = Oracle()
    out = {}
    for name, b in prelude().items():
        binders, q, t, _ = o.resolve_scheme(b.scheme, {}, NOPOS, rename=False)
        out[name] = (binders, q, t)
    return out


def global_env(prog: S.Program, oracle: Oracle) -> tuple[dict[str, Entry], dict[str, tuple]]:
    env: dict[str, Entry] = {}
    for name, (binders, q, t) in builtin_schemes().items():
        env[name] = Entry(MANY, binders, q, t, "builtin", True)
    sigs: dict[str, tuple] = {}
    for d in prog.decls:
        if d.name in prelude():
            raise TypeCheckError("Shadowing", f"{d.name} is a builtin and cannot be redefined", d.pos)
        if d.scheme is None:
            if d.name != "main":
                raise TypeCheckError("MissingSignature", f"top-level binding {d.name} needs a signature", d.pos)
            continue
        binders, q, t, ren = oracle.resolve_scheme(d.scheme, {}, d.pos, rename=False)
        env[d.name] = Entry(MANY, binders, q, t, "global", True)
        sigs[d.name] = (binders, q, t, ren)
    return env, sigs


def infer_program(prog: S.Program) -> list[BindingDerivation]:
    """Derivations for every top-level binding, in source order."""
    oracle = Oracle()
    env, sigs = global_env(prog, oracle)
    out = []
    for d in prog.decls:
        kexpr = _desugar_decl(d)
        if d.name in sigs:
            binders, q, t, ren = sigs[d.name]
            oracle.givens = [a for _, a in q.components()]
            body = oracle.check(kexpr, env, dict(ren), t)
            oracle.givens = []
            is_main = False
        else:
            if d.params:
                raise TypeCheckError("MissingSignature", "main cannot take parameters", d.pos)
            body = oracle.infer(kexpr, env, {})
            binders, q, t = (), SimpleConstraint(), body.type
            is_main = True
        oracle.finish(body)
        assign_paths(body)
        t = oracle.zonk(t)
        out.append(BindingDerivation(d.name, binders, q, t, body, is_main, d.pos))
    return out


def _desugar_decl(d: S.Decl) -> KExpr:
    ds = Desugarer()
    return ds.lams(d.params, ds.expr(d.body), d.pos)


# ---------------------------------------------------------------------------
# usage checking


def usage_check(bd: BindingDerivation) -> None:
    """Every 1-bound variable is used exactly once on every path."""
    _usage(bd.body, {})


def _bind_ok(name: str, mult: Mult, used: Usage, pos: Pos) -> None:
    if mult is MANY:
        return
    u = used.get(name)
    if u is None:
        raise LinearityError("LinearVariableUnused", f"linear variable {_show(name)} is never used", pos)
    if u is MANY:
        raise LinearityError(
            "LinearVariableOverused", f"linear variable {_show(name)} is used more than once", pos)


def _show(name: str) -> str:
    return "_" if name.startswith("%") else name


def _usage(n: Node, mults: dict[str, Mult]) -> None:
    if isinstance(n, DAbs):
        inner = dict(mults)
        inner[n.var] = n.mult
        _usage(n.body, inner)
        _bind_ok(n.var, n.mult, n.body.usage, n.pos)
    elif isinstance(n, DApp):
        _usage(n.fun, mults)
        _usage(n.arg, mults)
    elif isinstance(n, DPack):
        _usage(n.body, mults)
    elif isinstance(n, DUnpack):
        _usage(n.rhs, mults)
        inner = dict(mults)
        inner[n.var] = ONE
        _usage(n.body, inner)
        _bind_ok(n.var, ONE, n.body.usage, n.pos)
    elif isinstance(n, DCase):
        _usage(n.scrut, mults)
        branch_usages = []
        for a in n.alts:
            inner = dict(mults)
            inner.update(zip(a.vars, a.var_mults))
            _usage(a.body, inner)
            for v, m in zip(a.vars, a.var_mults):
                _bind_ok(v, m, a.body.usage, a.pos)
            branch_usages.append(u_drop(a.body.usage, *a.vars))
        names = set().union(*branch_usages) if branch_usages else set()
        for v in sorted(names):
            if mults.get(v) is not ONE:
                continue
            seen = {u.get(v) for u in branch_usages}
            if len(seen) > 1:
                raise LinearityError(
                    "BranchUsageMismatch",
                    f"linear variable {_show(v)} is not used the same way in every case branch", n.pos)
    elif isinstance(n, (DLet, DLetSig)):
        rhs_mults = dict(mults)
        if isinstance(n, DLetSig) and n.recursive:
            rhs_mults[n.var] = MANY
        _usage(n.rhs, rhs_mults)
        inner = dict(mults)
        inner[n.var] = n.mult
        _usage(n.body, inner)
        _bind_ok(n.var, n.mult, n.body.usage, n.pos)
