"""Type representation shared by the surface checker and the core calculus.

Types are immutable dataclasses.  Application is curried (``TApp``), so a
partially applied constructor such as ``AtomRef Int`` is an ordinary type
and can be passed where a ``Location -> Type`` argument is expected.

Surface-only forms: ``Constrained`` (a rank-2 constrained argument type)
and ``TExists`` (a package whose payload is a simple constraint).
Core-only forms: ``CExists`` (payload is an evidence type), ``TForall`` and
``TToken`` (the evidence of one atomic constraint).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Union

from .mult import MANY, ONE, Mult

if TYPE_CHECKING:  # pragma: no cover
    from .constraints import Atom, SimpleConstraint


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TMeta:
    id: int


@dataclass(frozen=True)
class TCon:
    name: str


@dataclass(frozen=True)
class TApp:
    fun: "Type"
    arg: "Type"


@dataclass(frozen=True)
class TArrow:
    arg: "Type"
    mult: Mult
    res: "Type"


@dataclass(frozen=True)
class Constrained:
    """``forall p. Q =o body`` in argument position."""

    binders: tuple[str, ...]
    assume: "SimpleConstraint"
    body: "Type"


@dataclass(frozen=True)
class TExists:
    binders: tuple[str, ...]
    body: "Type"
    payload: "SimpleConstraint"


@dataclass(frozen=True)
class CExists:
    binders: tuple[str, ...]
    value: "Type"
    evidence: "Type"


@dataclass(frozen=True)
class TForall:
    binders: tuple[str, ...]
    body: "Type"


@dataclass(frozen=True)
class TToken:
    atom: "Atom"


Type = Union[TVar, TMeta, TCon, TApp, TArrow, Constrained, TExists, CExists, TForall, TToken]

INT = TCon("Int")
BOOL = TCon("Bool")
UNIT = TCon("Unit")


def app(head: Type, *args: Type) -> Type:
    t = head
    for a in args:
        t = TApp(t, a)
    return t


def pair_t(a: Type, b: Type) -> Type:
    return app(TCon("Pair"), a, b)


def ur_t(a: Type) -> Type:
    return TApp(TCon("Ur"), a)


def spine(t: Type) -> tuple[Type, list[Type]]:
    args: list[Type] = []
    while isinstance(t, TApp):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


# ---------------------------------------------------------------------------
# traversal


def map_type(t: Type, f: Callable[[Type], Type | None]) -> Type:
    """Bottom-up rebuild; ``f`` may short-circuit by returning a type."""
    r = f(t)
    if r is not None:
        return r
    if isinstance(t, TApp):
        return TApp(map_type(t.fun, f), map_type(t.arg, f))
    if isinstance(t, TArrow):
        return TArrow(map_type(t.arg, f), t.mult, map_type(t.res, f))
    if isinstance(t, Constrained):
        return Constrained(t.binders, t.assume.map_types(lambda x: map_type(x, f)), map_type(t.body, f))
    if isinstance(t, TExists):
        return TExists(t.binders, map_type(t.body, f), t.payload.map_types(lambda x: map_type(x, f)))
    if isinstance(t, CExists):
        return CExists(t.binders, map_type(t.value, f), map_type(t.evidence, f))
    if isinstance(t, TForall):
        return TForall(t.binders, map_type(t.body, f))
    if isinstance(t, TToken):
        return TToken(t.atom.map_types(lambda x: map_type(x, f)))
    return t


def children(t: Type) -> Iterable[Type]:
    if isinstance(t, TApp):
        yield t.fun
        yield t.arg
    elif isinstance(t, TArrow):
        yield t.arg
        yield t.res
    elif isinstance(t, Constrained):
        yield from t.assume.types()
        yield t.body
    elif isinstance(t, TExists):
        yield t.body
        yield from t.payload.types()
    elif isinstance(t, CExists):
        yield t.value
        yield t.evidence
    elif isinstance(t, TForall):
        yield t.body
    elif isinstance(t, TToken):
        yield from t.atom.args


def binders_of(t: Type) -> tuple[str, ...]:
    if isinstance(t, (Constrained, TExists, CExists, TForall)):
        return t.binders
    return ()


def free_vars(t: Type) -> set[str]:
    out: set[str] = set()

    def go(t: Type, bound: frozenset[str]) -> None:
        if isinstance(t, TVar):
            if t.name not in bound:
                out.add(t.name)
            return
        inner = bound | frozenset(binders_of(t))
        for c in children(t):
            go(c, inner)

    go(t, frozenset())
    return out


def free_vars_ordered(t: Type) -> list[str]:
    """Free variables in order of first occurrence (left to right)."""
    seen: list[str] = []

    def go(t: Type, bound: frozenset[str]) -> None:
        if isinstance(t, TVar):
            if t.name not in bound and t.name not in seen:
                seen.append(t.name)
            return
        inner = bound | frozenset(binders_of(t))
        for c in children(t):
            go(c, inner)

    go(t, frozenset())
    return seen


def metas(t: Type) -> set[int]:
    out: set[int] = set()

    def go(t: Type) -> None:
        if isinstance(t, TMeta):
            out.add(t.id)
        for c in children(t):
            go(c)

    go(t)
    return out


def _fresh_name(base: str, avoid: set[str]) -> str:
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def subst(t: Type, sub: dict[str, Type]) -> Type:
    """Capture-avoiding substitution of rigid variables."""
    if not sub:
        return t
    if isinstance(t, TVar):
        return sub.get(t.name, t)
    if isinstance(t, (Constrained, TExists, CExists, TForall)):
        bs = t.binders
        sub = {k: v for k, v in sub.items() if k not in bs}
        if not sub:
            return t
        range_fv: set[str] = set()
        for v in sub.values():
            range_fv |= free_vars(v)
        renames: dict[str, Type] = {}
        new_bs = []
        avoid = range_fv | free_vars(t) | set(bs)
        for b in bs:
            if b in range_fv:
                nb = _fresh_name(b, avoid)
                avoid.add(nb)
                renames[b] = TVar(nb)
                new_bs.append(nb)
            else:
                new_bs.append(b)
        full = dict(renames)
        full.update(sub)
        nb_t = tuple(new_bs)
        if isinstance(t, Constrained):
            return Constrained(nb_t, t.assume.map_types(lambda x: subst(x, full)), subst(t.body, full))
        if isinstance(t, TExists):
            return TExists(nb_t, subst(t.body, full), t.payload.map_types(lambda x: subst(x, full)))
        if isinstance(t, CExists):
            return CExists(nb_t, subst(t.value, full), subst(t.evidence, full))
        assert isinstance(t, TForall)
        return TForall(nb_t, subst(t.body, full))
    if isinstance(t, TApp):
        return TApp(subst(t.fun, sub), subst(t.arg, sub))
    if isinstance(t, TArrow):
        return TArrow(subst(t.arg, sub), t.mult, subst(t.res, sub))
    if isinstance(t, TToken):
        return TToken(t.atom.map_types(lambda x: subst(x, sub)))
    return t


def subst_metas(t: Type, sub: dict[int, Type]) -> Type:
    def f(x: Type) -> Type | None:
        if isinstance(x, TMeta) and x.id in sub:
            return subst_metas(sub[x.id], sub)
        return None

    return map_type(t, f)


def canonical(t: Type) -> Type:
    """Rename every binder to a positional name so alpha-equivalent types
    become structurally equal."""

    counter = [0]

    def go(t: Type) -> Type:
        if isinstance(t, (Constrained, TExists, CExists, TForall)):
            bs = t.binders
            ren: dict[str, Type] = {}
            new_bs = []
            for b in bs:
                nm = f"%{counter[0]}"
                counter[0] += 1
                ren[b] = TVar(nm)
                new_bs.append(nm)
            nb = tuple(new_bs)
            if isinstance(t, Constrained):
                return Constrained(nb, t.assume.map_types(lambda x: go(subst(x, ren))), go(subst(t.body, ren)))
            if isinstance(t, TExists):
                return TExists(nb, go(subst(t.body, ren)), t.payload.map_types(lambda x: go(subst(x, ren))))
            if isinstance(t, CExists):
                return CExists(nb, go(subst(t.value, ren)), go(subst(t.evidence, ren)))
            assert isinstance(t, TForall)
            return TForall(nb, go(subst(t.body, ren)))
        if isinstance(t, TApp):
            return TApp(go(t.fun), go(t.arg))
        if isinstance(t, TArrow):
            return TArrow(go(t.arg), t.mult, go(t.res))
        if isinstance(t, TToken):
            return TToken(t.atom.map_types(go))
        return t

    return go(t)


def alpha_eq(a: Type, b: Type) -> bool:
    return canonical(a) == canonical(b)


# ---------------------------------------------------------------------------
# rendering in surface syntax


def render(t: Type) -> str:
    return _render(t, 0)


def _render(t: Type, prec: int) -> str:
    # prec 0: anything; 1: argument of an arrow; 2: argument of application
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, TMeta):
        return f"?{t.id}"
    if isinstance(t, TCon):
        return "()" if t.name == "Unit" else t.name
    if isinstance(t, TApp):
        head, args = spine(t)
        if head == TCon("Pair") and len(args) == 2:
            return f"({_render(args[0], 0)}, {_render(args[1], 0)})"
        s = " ".join([_render(head, 2)] + [_render(a, 2) for a in args])
        return f"({s})" if prec >= 2 else s
    if isinstance(t, TArrow):
        arrow = "->" if t.mult is MANY else "-o"
        s = f"{_render(t.arg, 1)} {arrow} {_render(t.res, 0)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, Constrained):
        q = "forall " + " ".join(t.binders) + ". " if t.binders else ""
        s = f"{q}{t.assume.render_context(_render(t.body, 0))}"
        return f"({s})"
    if isinstance(t, TExists):
        body = _render(t.body, 2 if _needs_parens_in_package(t.body) else 0)
        s = f"exists {' '.join(t.binders)}. {body} * {t.payload.render_payload()}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, CExists):
        s = f"exists {' '.join(t.binders)}. {_render(t.value, 2)} * {_render(t.evidence, 2)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, TForall):
        s = f"forall {' '.join(t.binders)}. {_render(t.body, 0)}"
        return f"({s})" if prec >= 1 else s
    if isinstance(t, TToken):
        return f"Tok[{t.atom.render()}]"
    raise TypeError(f"not a type: {t!r}")


def _needs_parens_in_package(t: Type) -> bool:
    return isinstance(t, (TArrow, TExists, Constrained, TForall, CExists))
