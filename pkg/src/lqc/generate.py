"""Constraint generation from typing derivations.

One wanted constraint per top-level binding.  Every atom occurrence gets
a site id ``binding@path#k`` and every implication a label, so that the
solver's evidence map can be routed back to the term by the elaborator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import TRUE, Impl, Simple, SimpleConstraint, Site, Tensor, Wanted, With, c_scale
from .errors import Pos
from .mult import MANY, ONE
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


@dataclass
class Generated:
    binding: str
    wanted: Wanted
    positions: dict[str, Pos] = field(default_factory=dict)


def site_id(binding: str, path: str, k: int) -> str:
    return f"{binding}@{path}#{k}"


def impl_label(binding: str, path: str) -> str:
    return f"{binding}@{path}"


def arg_label(binding: str, path: str) -> str:
    return f"{binding}@{path}!arg"


def top_label(binding: str) -> str:
    return f"{binding}@top"


def q_of(cs: tuple[Component, ...]) -> SimpleConstraint:
    return SimpleConstraint.of((a for m, a in cs if m is MANY), (a for m, a in cs if m is ONE))


def _is_true(c: Wanted) -> bool:
    return isinstance(c, Simple) and c.q.is_empty() and not c.sites


def tensor(a: Wanted, b: Wanted) -> Wanted:
    """``a ⊗ b``, dropping trivially true sides."""
    if _is_true(a):
        return b
    if _is_true(b):
        return a
    return Tensor(a, b)


class Generator:
    def __init__(self, binding: str) -> None:
        self.binding = binding
        self.positions: dict[str, Pos] = {}

    def sites(self, n: Node, cs: tuple[Component, ...]) -> Wanted:
        if not cs:
            return TRUE
        sites = []
        for k, (m, a) in enumerate(cs):
            sid = site_id(self.binding, n.path, k)
            self.positions[sid] = n.pos
            sites.append(Site(sid, m, a, m))
        return Simple(q_of(cs), tuple(sites))

    def gen(self, n: Node) -> Wanted:
        if isinstance(n, DVar):
            return self.sites(n, n.wanted)
        if isinstance(n, DLit):
            return TRUE
        if isinstance(n, DAbs):
            return self.gen(n.body)
        if isinstance(n, DApp):
            c1 = self.gen(n.fun)
            c2 = self.gen(n.arg)
            if n.arg_impl is not None:
                label = arg_label(self.binding, n.path)
                self.positions[label] = n.arg.pos
                c2 = Impl(ONE, q_of(n.arg_impl.assume), c2, label)
            return tensor(c1, c_scale(n.mult, c2))
        if isinstance(n, DPack):
            return tensor(self.gen(n.body), self.sites(n, n.payload))
        if isinstance(n, DUnpack):
            label = impl_label(self.binding, n.path)
            self.positions[label] = n.pos
            c1 = self.gen(n.rhs)
            c2 = Impl(ONE, q_of(n.payload), self.gen(n.body), label)
            return tensor(c1, c2)
        if isinstance(n, DCase):
            c = c_scale(n.mult, self.gen(n.scrut))
            branches = [self.gen(a.body) for a in n.alts]
            acc = branches[-1]
            for b in reversed(branches[:-1]):
                acc = With(b, acc)
            return tensor(c, acc)
        if isinstance(n, DLet):
            return tensor(c_scale(n.mult, self.gen(n.rhs)), self.gen(n.body))
        if isinstance(n, DLetSig):
            label = impl_label(self.binding, n.path)
            self.positions[label] = n.pos
            c1 = Impl(ONE, n.assume, self.gen(n.rhs), label)
            return tensor(c_scale(n.mult, c1), self.gen(n.body))
        raise TypeError(n)


def generate(bd: BindingDerivation) -> Generated:
    g = Generator(bd.name)
    body = g.gen(bd.body)
    if bd.is_main:
        return Generated(bd.name, body, g.positions)
    label = top_label(bd.name)
    g.positions[label] = bd.pos
    return Generated(bd.name, Impl(MANY, bd.assume, body, label), g.positions)
