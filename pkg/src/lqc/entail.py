"""Brute-force entailment for the stripped-down constraint domain.

``entails_simple`` decides ``Q1 ⊩ Q2``: every atom is provable only from an
identical assumption, linear assumptions must be used exactly once, and the
single duplicable atom ``Linearly`` may be copied or dropped when assumed
linearly.

``entails_wanted`` decides ``Q ⊢ C`` by exhaustive search over the ways of
splitting the linear assumptions between the two sides of every tensor.
It is exponential and only meant as a ground truth for small instances; a
node budget turns runaway searches into ``Inconclusive`` rather than a
wrong answer.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product

from .constraints import (
    EPS,
    Atom,
    Impl,
    Simple,
    SimpleConstraint,
    Tensor,
    Wanted,
    With,
    depth,
    is_duplicable,
    q_tensor,
    strip_sites,
)
from .mult import MANY


class Inconclusive(Exception):
    """The search exceeded its budget."""


@dataclass(frozen=True)
class OracleBudget:
    max_atoms: int = 8
    max_depth: int = 8
    max_nodes: int = 200_000


def entails_simple(q1: SimpleConstraint, q2: SimpleConstraint) -> bool:
    u1 = set(q1.U)
    # ω·q is only provable from an unrestricted assumption of q
    if not set(q2.U) <= u1:
        return False
    have = Counter(q1.L)
    want = Counter(q2.L)
    for atom in set(have) | set(want):
        h, w = have[atom], want[atom]
        if is_duplicable(atom):
            # copies and drops are free; only need a source when wanted
            if w > 0 and h == 0 and atom not in u1:
                return False
        elif atom in u1:
            # every linear copy must still be consumed by a wanted one
            if h > w:
                return False
        elif h != w:
            return False
    return True


def _submultisets(items: tuple[Atom, ...]) -> list[tuple[tuple[Atom, ...], tuple[Atom, ...]]]:
    """All ways to split a sorted multiset into (left, right)."""
    counts = sorted(Counter(items).items(), key=lambda kv: kv[0].sort_key())
    out = []
    for choice in product(*[range(n + 1) for _, n in counts]):
        left: list[Atom] = []
        right: list[Atom] = []
        for (atom, n), k in zip(counts, choice):
            left += [atom] * k
            right += [atom] * (n - k)
        out.append((tuple(left), tuple(right)))
    return out


class _Search:
    def __init__(self, budget: OracleBudget):
        self.budget = budget
        self.nodes = 0
        self.memo: dict[tuple[SimpleConstraint, Wanted], bool] = {}

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise Inconclusive(f"more than {self.budget.max_nodes} search nodes")

    def splits(self, q: SimpleConstraint):
        """Tensor splits of ``q`` with a shared duplicable part.

        The unrestricted atoms go to both sides (ω·q ⊗ ω·q = ω·q).  Linear
        non-duplicable atoms are partitioned; the duplicable ones are
        divided as ``left ⊎ shared ⊎ right`` with the shared part given to
        both sides.
        """
        plain = tuple(a for a in q.L if not is_duplicable(a))
        dups = tuple(a for a in q.L if is_duplicable(a))
        dup_kinds = sorted(set(dups), key=Atom.sort_key)
        dup_options = []
        for atom in dup_kinds:
            n = dups.count(atom)
            opts = []
            for shared in range(n + 1):
                for left in range(n - shared + 1):
                    right = n - shared - left
                    opts.append(([atom] * (left + shared), [atom] * (right + shared)))
            dup_options.append(opts)
        for l_plain, r_plain in _submultisets(plain):
            for combo in product(*dup_options) if dup_options else [()]:
                l_d: list[Atom] = []
                r_d: list[Atom] = []
                for l_part, r_part in combo:
                    l_d += l_part
                    r_d += r_part
                yield (
                    SimpleConstraint(q.U, l_plain + tuple(l_d)),
                    SimpleConstraint(q.U, r_plain + tuple(r_d)),
                )

    def ent(self, q: SimpleConstraint, c: Wanted) -> bool:
        key = (q, c)
        if key in self.memo:
            return self.memo[key]
        self.tick()
        result = self._ent(q, c)
        self.memo[key] = result
        return result

    def _ent(self, q: SimpleConstraint, c: Wanted) -> bool:
        if isinstance(c, Simple):
            return entails_simple(q, c.q)
        if isinstance(c, With):
            return self.ent(q, c.left) and self.ent(q, c.right)
        if isinstance(c, Tensor):
            for q1, q2 in self.splits(q):
                if self.ent(q1, c.left) and self.ent(q2, c.right):
                    return True
            return False
        if isinstance(c, Impl):
            if c.mult is MANY:
                # Q ⊩ ω·Q0 needs every linear assumption to be droppable;
                # the strongest such Q0 keeps all of U.
                if not q.in_dup():
                    return False
                return self.ent(q_tensor(SimpleConstraint(q.U, ()), c.assume), c.body)
            return self.ent(q_tensor(q, c.assume), c.body)
        raise TypeError(c)


def entails_wanted(q: SimpleConstraint, c: Wanted, budget: OracleBudget | None = None) -> bool:
    """Decide ``q ⊢ c``; raises ``Inconclusive`` when the budget runs out."""
    budget = budget or OracleBudget()
    c = strip_sites(c)
    if depth(c) > budget.max_depth:
        raise Inconclusive(f"constraint deeper than {budget.max_depth}")
    distinct = set(q.atoms()) | _atoms(c)
    if len(distinct) > budget.max_atoms:
        raise Inconclusive(f"more than {budget.max_atoms} distinct atoms")
    return _Search(budget).ent(q, c)


def _atoms(c: Wanted) -> set[Atom]:
    if isinstance(c, Simple):
        return set(c.q.atoms())
    if isinstance(c, (Tensor, With)):
        return _atoms(c.left) | _atoms(c.right)
    return set(c.assume.atoms()) | _atoms(c.body)


def verdict(q: SimpleConstraint, c: Wanted, budget: OracleBudget | None = None) -> str:
    try:
        return "true" if entails_wanted(q, c, budget) else "false"
    except Inconclusive:
        return "inconclusive"


__all__ = ["Inconclusive", "OracleBudget", "entails_simple", "entails_wanted", "verdict", "EPS"]
