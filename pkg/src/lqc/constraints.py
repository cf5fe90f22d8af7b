"""Constraints: simple ones built from atoms, and the wanted constraints of generation.

A simple constraint is the pair ``(U, L)`` of an unrestricted atom set and a
linear atom multiset.  Both components are kept as sorted tuples, so the
quotient equalities (commutativity, associativity, unit, idempotence of
unrestricted atoms) hold by plain structural equality.

Wanted constraints are trees over simple constraints.  Leaves may carry
*sites*: one named occurrence per atom, used to route evidence later.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Union

from .mult import MANY, ONE, Mult, mult_mul
from .types import Type, render as render_type, _render


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple[Type, ...] = ()

    def render(self) -> str:
        if not self.args:
            return self.name
        return " ".join([self.name] + [_render(a, 2) for a in self.args])

    def __str__(self) -> str:
        return self.render()

    def map_types(self, f: Callable[[Type], Type]) -> "Atom":
        if not self.args:
            return self
        return Atom(self.name, tuple(f(a) for a in self.args))

    def sort_key(self) -> str:
        return self.render()


LINEARLY = Atom("Linearly")


def is_duplicable(a: Atom) -> bool:
    """Membership of an atom in the duplicable set; only ``Linearly``."""
    return a == LINEARLY


def _sorted(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    return tuple(sorted(atoms, key=Atom.sort_key))


@dataclass(frozen=True)
class SimpleConstraint:
    U: tuple[Atom, ...] = ()
    L: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "U", _sorted(set(self.U)))
        object.__setattr__(self, "L", _sorted(self.L))

    @staticmethod
    def of(U: Iterable[Atom] = (), L: Iterable[Atom] = ()) -> "SimpleConstraint":
        return SimpleConstraint(tuple(U), tuple(L))

    def is_empty(self) -> bool:
        return not self.U and not self.L

    def tensor(self, other: "SimpleConstraint") -> "SimpleConstraint":
        return q_tensor(self, other)

    def scale(self, p: Mult) -> "SimpleConstraint":
        return q_scale(p, self)

    def in_dup(self) -> bool:
        return all(is_duplicable(a) for a in self.L)

    def atoms(self) -> list[Atom]:
        return list(self.U) + list(self.L)

    def components(self) -> list[tuple[Mult, Atom]]:
        """Canonical listing: unrestricted atoms first, then linear ones."""
        return [(MANY, a) for a in self.U] + [(ONE, a) for a in self.L]

    def types(self) -> Iterator[Type]:
        for a in self.atoms():
            yield from a.args

    def map_types(self, f: Callable[[Type], Type]) -> "SimpleConstraint":
        return SimpleConstraint(tuple(a.map_types(f) for a in self.U), tuple(a.map_types(f) for a in self.L))

    # -- renderings ---------------------------------------------------------

    def render(self) -> str:
        """Canonical text ``{U: [...], L: [...]}``."""
        u = ", ".join(a.render() for a in self.U)
        l = ", ".join(a.render() for a in self.L)
        return f"{{U: [{u}], L: [{l}]}}"

    def __str__(self) -> str:
        return self.render()

    def to_json(self) -> dict:
        return {"U": [a.render() for a in self.U], "L": [a.render() for a in self.L]}

    def _items(self, mark_many: bool) -> list[str]:
        items = [("many " if mark_many else "") + a.render() for a in self.U]
        items += [a.render() for a in self.L]
        return items

    def render_context(self, body: str) -> str:
        """Render as the qualified part of a scheme: ``ctx => body``."""
        if self.is_empty():
            return body
        if not self.L:
            items = self._items(False)
            arrow = "=>"
        else:
            items = self._items(True)
            arrow = "=o"
        ctx = items[0] if len(items) == 1 and not items[0].startswith("many ") else "(" + ", ".join(items) + ")"
        return f"{ctx} {arrow} {body}"

    def render_payload(self) -> str:
        return "(" + ", ".join(self._items(True)) + ")"


Q = SimpleConstraint
EPS = SimpleConstraint()


def q_tensor(a: SimpleConstraint, b: SimpleConstraint) -> SimpleConstraint:
    return SimpleConstraint(a.U + b.U, a.L + b.L)


def q_scale(p: Mult, q: SimpleConstraint) -> SimpleConstraint:
    if p is ONE:
        return q
    return SimpleConstraint(q.U + q.L, ())


def q_one(a: Atom) -> SimpleConstraint:
    return SimpleConstraint((), (a,))


def q_many(a: Atom) -> SimpleConstraint:
    return SimpleConstraint((a,), ())


def multiset_sub(small: Iterable, big: Iterable) -> bool:
    s, b = Counter(small), Counter(big)
    return all(b[k] >= n for k, n in s.items())


# ---------------------------------------------------------------------------
# wanted constraints


@dataclass(frozen=True)
class Site:
    """One wanted atom occurrence: its identifier, requested multiplicity
    (after scaling) and the multiplicity declared at the use site."""

    id: str
    mult: Mult
    atom: Atom
    declared: Mult = ONE


@dataclass(frozen=True)
class Simple:
    q: SimpleConstraint
    sites: tuple[Site, ...] = field(default=())


@dataclass(frozen=True)
class Tensor:
    left: "Wanted"
    right: "Wanted"


@dataclass(frozen=True)
class With:
    left: "Wanted"
    right: "Wanted"


@dataclass(frozen=True)
class Impl:
    mult: Mult
    assume: SimpleConstraint
    body: "Wanted"
    label: str = ""


Wanted = Union[Simple, Tensor, With, Impl]

TRUE = Simple(EPS)


def c_scale(p: Mult, c: Wanted) -> Wanted:
    if p is ONE:
        return c
    if isinstance(c, Simple):
        return Simple(q_scale(p, c.q), tuple(Site(s.id, mult_mul(p, s.mult), s.atom, s.declared) for s in c.sites))
    if isinstance(c, Tensor):
        return Tensor(c_scale(p, c.left), c_scale(p, c.right))
    if isinstance(c, With):
        return Tensor(c_scale(p, c.left), c_scale(p, c.right))
    if isinstance(c, Impl):
        return Impl(mult_mul(p, c.mult), c.assume, c.body, c.label)
    raise TypeError(c)


def strip_sites(c: Wanted) -> Wanted:
    if isinstance(c, Simple):
        return Simple(c.q)
    if isinstance(c, Tensor):
        return Tensor(strip_sites(c.left), strip_sites(c.right))
    if isinstance(c, With):
        return With(strip_sites(c.left), strip_sites(c.right))
    return Impl(c.mult, c.assume, strip_sites(c.body))


def depth(c: Wanted) -> int:
    if isinstance(c, Simple):
        return 0
    if isinstance(c, (Tensor, With)):
        return 1 + max(depth(c.left), depth(c.right))
    return 1 + depth(c.body)


def all_sites(c: Wanted) -> list[Site]:
    if isinstance(c, Simple):
        return list(c.sites)
    if isinstance(c, (Tensor, With)):
        return all_sites(c.left) + all_sites(c.right)
    return all_sites(c.body)


def simplify(c: Wanted) -> Wanted:
    """Drop empty conjuncts and merge neighbouring simple constraints.

    Only used for display and for comparing against hand traces; the
    solver always runs on the generated tree.
    """
    if isinstance(c, Simple):
        return Simple(c.q)
    if isinstance(c, Tensor):
        l, r = simplify(c.left), simplify(c.right)
        if isinstance(l, Simple) and isinstance(r, Simple):
            return Simple(q_tensor(l.q, r.q))
        if l == TRUE:
            return r
        if r == TRUE:
            return l
        return Tensor(l, r)
    if isinstance(c, With):
        return With(simplify(c.left), simplify(c.right))
    return Impl(c.mult, c.assume, simplify(c.body))


def render_wanted(c: Wanted) -> str:
    if isinstance(c, Simple):
        return c.q.render()
    if isinstance(c, Tensor):
        return f"({render_wanted(c.left)} * {render_wanted(c.right)})"
    if isinstance(c, With):
        return f"({render_wanted(c.left)} & {render_wanted(c.right)})"
    return f"{c.mult.ascii}.({c.assume.render()} => {render_wanted(c.body)})"


def wanted_to_json(c: Wanted) -> dict:
    if isinstance(c, Simple):
        return {"simple": c.q.to_json()}
    if isinstance(c, Tensor):
        return {"tensor": [wanted_to_json(c.left), wanted_to_json(c.right)]}
    if isinstance(c, With):
        return {"with": [wanted_to_json(c.left), wanted_to_json(c.right)]}
    return {"impl": {"mult": c.mult.ascii, "assume": c.assume.to_json(), "body": wanted_to_json(c.body)}}


def parse_atom_text(text: str) -> Atom:
    """Atoms in JSON payloads are written as in source: ``Read n``."""
    from .types import TCon, TVar

    parts = text.split()
    if not parts:
        raise ValueError("empty atom")
    args = tuple(TVar(p) if p[0].islower() else TCon(p) for p in parts[1:])
    return Atom(parts[0], args)


def q_from_json(obj: dict) -> SimpleConstraint:
    return SimpleConstraint(
        tuple(parse_atom_text(a) for a in obj.get("U", [])),
        tuple(parse_atom_text(a) for a in obj.get("L", [])),
    )


def wanted_from_json(obj: dict) -> Wanted:
    if "simple" in obj:
        return Simple(q_from_json(obj["simple"]))
    if "tensor" in obj:
        l, r = obj["tensor"]
        return Tensor(wanted_from_json(l), wanted_from_json(r))
    if "with" in obj:
        l, r = obj["with"]
        return With(wanted_from_json(l), wanted_from_json(r))
    if "impl" in obj:
        i = obj["impl"]
        return Impl(Mult.from_ascii(i["mult"]), q_from_json(i["assume"]), wanted_from_json(i["body"]))
    if "U" in obj or "L" in obj:
        return Simple(q_from_json(obj))
    raise ValueError(f"not a wanted constraint: {obj!r}")


__all__ = [
    "Atom", "LINEARLY", "is_duplicable", "SimpleConstraint", "Q", "EPS", "q_tensor", "q_scale",
    "q_one", "q_many", "multiset_sub", "Site", "Simple", "Tensor", "With", "Impl", "Wanted", "TRUE",
    "c_scale", "strip_sites", "depth", "all_sites", "simplify", "render_wanted", "wanted_to_json",
    "wanted_from_json", "q_from_json", "render_type",
]
