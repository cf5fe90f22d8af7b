"""Elaboration of checked bindings into the explicit-evidence core.

Each given the solver can hand out has a stable name (``label#u0``,
``label#l1``); the elaborator binds a core variable of exactly that name
where the implication introducing it sits, and each constraint site is
replaced by the variable the solver's evidence map points to.

Linear givens are used exactly once by construction.  Unrestricted ones
are unpacked from their ``Ur`` box and bound at ω.  Duplicable ones
(``Linearly``) may be used any number of times by the solver's answer,
so a last pass threads ``dupL``/``dropL`` through the term.
"""

from __future__ import annotations

from itertools import count

from .constraints import Atom
from .core import (
    CAlt,
    CApp,
    CCase,
    CCon,
    CDef,
    CLam,
    CLet,
    CLetRec,
    CLit,
    CPack,
    CProgram,
    CTyLam,
    CUnpack,
    CVar,
    Term,
    app,
    core_type,
    ev_type,
    ev_type_of,
    scheme_type,
    term_children,
)
from .constraints import is_duplicable
from .errors import InternalError
from .generate import arg_label, impl_label, q_of, site_id, top_label
from .mult import MANY, ONE, Mult
from .oracle import (
    BindingDerivation,
    Component,
    DAbs,
    DApp,
    DCase,
    DLet,
    DLetSig,
    DLit,
    DPack,
    DUnpack,
    DVar,
    Node,
)
from .solver import Evidence, impl_givens
from .types import CExists, TToken, Type, pair_t, ur_t


def _ev_part_type(m: Mult, a: Atom) -> Type:
    return TToken(a) if m is ONE else ur_t(TToken(a))


def pair_term(parts: list[tuple[Term, Type]]) -> Term:
    """Right-nested pair of already typed terms; ``()`` when empty."""
    if not parts:
        return CCon("Unit")
    term, ty = parts[-1]
    for t, tt in reversed(parts[:-1]):
        term = app(CCon("Pair", (tt, ty)), t, term)
        ty = pair_t(tt, ty)
    return term


class Elaborator:
    def __init__(self, binding: str, evidence: dict[str, Evidence]) -> None:
        self.binding = binding
        self.evidence = evidence
        self._fresh = count(1)

    def fresh(self, base: str = "e") -> str:
        return f"%{base}{next(self._fresh)}"

    # -- evidence at use sites ----------------------------------------------

    def ev_tuple(self, n: Node, comps: tuple[Component, ...]) -> Term:
        parts = []
        for k, (m, a) in enumerate(comps):
            sid = site_id(self.binding, n.path, k)
            if sid not in self.evidence:
                raise InternalError(f"no evidence recorded for site {sid}")
            ev = self.evidence[sid]
            if m is ONE:
                parts.append((CVar(ev.name), TToken(a)))
            else:
                if ev.source != "U":
                    raise InternalError(f"site {sid} needs unrestricted evidence, got {ev.source}")
                parts.append((app(CCon("Ur", (TToken(a),)), CVar(ev.name)), ur_t(TToken(a))))
        return pair_term(parts)

    # -- evidence at implications -------------------------------------------

    def bind_givens(self, label: str, comps: list[Component], z: Term, body: Term) -> Term:
        """Destructure ``z : ev(comps)`` into the named givens of ``label``."""
        pool = impl_givens(label, q_of(tuple(comps)))
        names: list[str] = []
        used: set[str] = set()
        for m, a in comps:
            hit = next((nm for pm, pa, nm in pool if pm is m and pa == a and nm not in used), None)
            if hit is None:
                # a repeated unrestricted atom: the set keeps only one given
                if m is not MANY:
                    raise InternalError(f"no given for {a.render()} at {label}")
                hit = self.fresh("dup")
            used.add(hit)
            names.append(hit)
        for (m, a), nm in zip(comps, names):
            if m is ONE and is_duplicable(a):
                body = thread_dup(body, nm, self.fresh)
        return self._destructure(z, list(zip(comps, names)), body)

    def _destructure(self, z: Term, items: list[tuple[Component, str]], body: Term) -> Term:
        if not items:
            return CCase(ONE, z, (CAlt("Unit", (), body),))
        if len(items) == 1:
            return self._single(z, items[0], body)
        (m, a), nm = items[0]
        head = nm if m is ONE else self.fresh("ur")
        rest = self.fresh("ev")
        inner = self._destructure(CVar(rest), items[1:], body)
        if m is MANY:
            inner = CCase(ONE, CVar(head), (CAlt("Ur", (nm,), inner),))
        return CCase(ONE, z, (CAlt("Pair", (head, rest), inner),))

    def _single(self, z: Term, item: tuple[Component, str], body: Term) -> Term:
        (m, a), nm = item
        if m is ONE:
            return CLet(ONE, nm, TToken(a), z, body)
        return CCase(ONE, z, (CAlt("Ur", (nm,), body),))

    def abstract(self, label: str, binders: tuple[str, ...], comps: list[Component], body: Term) -> Term:
        """``/\\ binders. \\z. <bind the givens of label> body``."""
        z = f"z@{label}"
        lam = CLam(z, ONE, ev_type_of(comps), self.bind_givens(label, comps, CVar(z), body))
        return CTyLam(tuple(binders), lam) if binders else lam

    # -- terms --------------------------------------------------------------

    def elab(self, n: Node) -> Term:
        if isinstance(n, DVar):
            tys = tuple(core_type(t) for t in n.inst)
            if n.role == "con":
                return CCon(n.name, tys)
            if n.qualified:
                return CApp(CVar(n.name, tys), self.ev_tuple(n, n.wanted))
            return CVar(n.name)
        if isinstance(n, DLit):
            return CLit(n.value)
        if isinstance(n, DAbs):
            return CLam(n.var, n.mult, core_type(n.arg_type), self.elab(n.body))
        if isinstance(n, DApp):
            fun = self.elab(n.fun)
            arg = self.elab(n.arg)
            if n.arg_impl is not None:
                label = arg_label(self.binding, n.path)
                arg = self.abstract(label, n.arg_impl.skolems, list(n.arg_impl.assume), arg)
            return CApp(fun, arg)
        if isinstance(n, DPack):
            t = core_type(n.type)
            assert isinstance(t, CExists)
            return CPack(t, tuple(core_type(x) for x in n.inst), self.ev_tuple(n, n.payload), self.elab(n.body))
        if isinstance(n, DUnpack):
            label = impl_label(self.binding, n.path)
            z = f"z@{label}"
            body = self.bind_givens(label, list(n.payload), CVar(z), self.elab(n.body))
            return CUnpack(n.skolems, z, n.var, self.elab(n.rhs), body)
        if isinstance(n, DCase):
            alts = tuple(CAlt(a.con, a.vars, self.elab(a.body)) for a in n.alts)
            return CCase(n.mult, self.elab(n.scrut), alts)
        if isinstance(n, DLet):
            return CLet(n.mult, n.var, core_type(n.var_type), self.elab(n.rhs), self.elab(n.body))
        if isinstance(n, DLetSig):
            label = impl_label(self.binding, n.path)
            t = scheme_type(n.binders, n.assume, n.sig_type)
            rhs = self.abstract(label, n.binders, n.assume.components(), self.elab(n.rhs))
            body = self.elab(n.body)
            if n.recursive:
                return CLetRec(n.var, t, rhs, body)
            return CLet(n.mult, n.var, t, rhs, body)
        raise TypeError(n)


def elaborate_binding(bd: BindingDerivation, evidence: dict[str, Evidence]) -> CDef:
    e = Elaborator(bd.name, evidence)
    body = e.elab(bd.body)
    if bd.is_main:
        return CDef(bd.name, core_type(bd.type), body)
    term = e.abstract(top_label(bd.name), bd.binders, bd.assume.components(), body)
    return CDef(bd.name, scheme_type(bd.binders, bd.assume, bd.type), term)


def elaborate(checked) -> CProgram:
    """Elaborate a list of ``pipeline.Checked`` bindings."""
    return CProgram(tuple(elaborate_binding(c.derivation, c.solved.evidence) for c in checked))


# ---------------------------------------------------------------------------
# duplicable evidence


def occurrences(t: Term, x: str) -> int:
    if isinstance(t, CVar):
        return int(t.name == x)
    return sum(occurrences(c, x) for c in term_children(t))


def rename(t: Term, x: str, y: str) -> Term:
    if isinstance(t, CVar):
        return CVar(y, t.tyargs) if t.name == x else t
    kids = term_children(t)
    if not kids:
        return t
    return with_children(t, [rename(c, x, y) for c in kids])


def with_children(t: Term, kids: list[Term]) -> Term:
    if isinstance(t, CLam):
        return CLam(t.var, t.mult, t.type, kids[0])
    if isinstance(t, CApp):
        return CApp(kids[0], kids[1])
    if isinstance(t, CTyLam):
        return CTyLam(t.binders, kids[0])
    if isinstance(t, CPack):
        return CPack(t.type, t.witnesses, kids[0], kids[1])
    if isinstance(t, CUnpack):
        return CUnpack(t.skolems, t.ev_var, t.val_var, kids[0], kids[1])
    if isinstance(t, CCase):
        alts = tuple(CAlt(a.con, a.vars, b) for a, b in zip(t.alts, kids[1:]))
        return CCase(t.mult, kids[0], alts)
    if isinstance(t, CLet):
        return CLet(t.mult, t.var, t.type, kids[0], kids[1])
    if isinstance(t, CLetRec):
        return CLetRec(t.var, t.type, kids[0], kids[1])
    return t


def _dup_chain(src: str, names: list[str], body: Term, fresh) -> Term:
    """Bind ``names`` to copies of the token ``src``."""
    if len(names) == 2:
        return CCase(ONE, app(CVar("dupL"), CVar(src)), (CAlt("Pair", tuple(names), body),))
    rest = fresh("d")
    inner = _dup_chain(rest, names[1:], body, fresh)
    return CCase(ONE, app(CVar("dupL"), CVar(src)), (CAlt("Pair", (names[0], rest), inner),))


def thread_dup(t: Term, d: str, fresh) -> Term:
    """Make the linear token variable ``d`` occur exactly once on every path,
    inserting ``dupL`` where uses fan out and ``dropL`` where there are none."""
    k = occurrences(t, d)
    if k == 0:
        return CCase(ONE, app(CVar("dropL"), CVar(d)), (CAlt("Unit", (), t),))
    if k == 1:
        return t
    kids = term_children(t)
    if isinstance(t, CCase):
        scrut, branches = kids[0], kids[1:]
        if occurrences(scrut, d) == 0:
            return with_children(t, [scrut] + [thread_dup(b, d, fresh) for b in branches])
        if all(occurrences(b, d) == 0 for b in branches):
            return with_children(t, [thread_dup(scrut, d, fresh)] + branches)
        d1, d2 = fresh("d"), fresh("d")
        new = [thread_dup(rename(scrut, d, d1), d1, fresh)]
        new += [thread_dup(rename(b, d, d2), d2, fresh) for b in branches]
        return _dup_chain(d, [d1, d2], with_children(t, new), fresh)
    hot = [i for i, c in enumerate(kids) if occurrences(c, d)]
    if len(hot) == 1:
        i = hot[0]
        return with_children(t, kids[:i] + [thread_dup(kids[i], d, fresh)] + kids[i + 1:])
    names = [fresh("d") for _ in hot]
    new = list(kids)
    for i, nm in zip(hot, names):
        new[i] = thread_dup(rename(kids[i], d, nm), nm, fresh)
    return _dup_chain(d, names, with_children(t, new), fresh)


# ---------------------------------------------------------------------------
# the Ur coercion


def coerce_ur(term: Term, comps: list[Component], fresh=None) -> Term:
    """Turn ``term : ev(ω·Q)`` into a term of type ``Ur ev(Q)``."""
    fresh = fresh or _counter()
    if not comps:
        return CCase(ONE, term, (CAlt("Unit", (), app(CCon("Ur", (ev_type_of([]),)), CCon("Unit"))),))
    if len(comps) == 1:
        m, a = comps[0]
        if m is ONE:
            return term
        x = fresh("x")
        inner = ur_t(TToken(a))
        return CCase(ONE, term, (CAlt("Ur", (x,), app(CCon("Ur", (inner,)), app(CCon("Ur", (TToken(a),)), CVar(x)))),))
    head, rest = comps[:1], comps[1:]
    a, b, x, y = fresh("a"), fresh("b"), fresh("x"), fresh("y")
    th, tr = ev_type_of(head), ev_type_of(rest)
    whole = pair_t(th, tr)
    built = app(CCon("Ur", (whole,)), app(CCon("Pair", (th, tr)), CVar(x), CVar(y)))
    inner = CCase(ONE, coerce_ur(CVar(b), rest, fresh), (CAlt("Ur", (y,), built),))
    inner = CCase(ONE, coerce_ur(CVar(a), head, fresh), (CAlt("Ur", (x,), inner),))
    return CCase(ONE, term, (CAlt("Pair", (a, b), inner),))


def _counter():
    c = count(1)
    return lambda base="v": f"%{base}{next(c)}"


def scaled_ev_type(comps: list[Component]) -> Type:
    """``ev(ω·Q)``: every component becomes unrestricted."""
    return ev_type_of([(MANY, a) for _, a in comps])


__all__ = [
    "Elaborator",
    "coerce_ur",
    "elaborate",
    "elaborate_binding",
    "ev_type",
    "scaled_ev_type",
    "thread_dup",
]
