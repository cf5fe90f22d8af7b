"""The deterministic, guess-free constraint solver.

Judgement ``U; D; L_i ⊢ C ↝ L_o``: ``U`` holds unrestricted givens, ``D``
linear givens that are duplicable (only ``Linearly``), and ``L`` the other
linear givens, most recent first.  ``L_o`` is what ``C`` did not consume.

Every given carries a name so the elaborator can route evidence.  Names
also make the implication side condition ``L_o ⊆ L_i`` precise: a local
given leaking out is detected even when an outer given has the same atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import (
    Atom,
    Impl,
    Simple,
    SimpleConstraint,
    Site,
    Tensor,
    Wanted,
    With,
    is_duplicable,
)
from .errors import Pos, SolveError
from .mult import MANY, ONE, Mult


@dataclass(frozen=True)
class Given:
    atom: Atom
    name: str

    def render(self) -> str:
        return f"{self.atom.render()}<{self.name}>"


@dataclass(frozen=True)
class GivenContext:
    U: tuple[Given, ...] = ()
    D: tuple[Given, ...] = ()
    L: tuple[Given, ...] = ()

    @staticmethod
    def from_atoms(U=(), D=(), L=()) -> "GivenContext":
        """Anonymous givens for tests and fuzzing, numbered per component."""
        return GivenContext(
            tuple(Given(a, f"u{i}") for i, a in enumerate(U)),
            tuple(Given(a, f"d{i}") for i, a in enumerate(D)),
            tuple(Given(a, f"l{i}") for i, a in enumerate(L)),
        )


@dataclass(frozen=True)
class Evidence:
    source: str  # "U", "D" or "L"
    name: str


def impl_givens(label: str, q: SimpleConstraint) -> list[tuple[Mult, Atom, str]]:
    """Names of the givens an implication introduces, in canonical order."""
    out = []
    for i, a in enumerate(q.U):
        out.append((MANY, a, f"{label}#u{i}"))
    for j, a in enumerate(q.L):
        out.append((ONE, a, f"{label}#l{j}"))
    return out


@dataclass
class TraceStep:
    rule: str
    wanted: str
    before: tuple[str, ...]
    after: tuple[str, ...]

    def render(self) -> str:
        return f"{self.rule:<11} {self.wanted}  L=[{', '.join(self.before)}] -> [{', '.join(self.after)}]"

    def to_json(self) -> dict:
        return {"rule": self.rule, "wanted": self.wanted, "before": list(self.before), "after": list(self.after)}


@dataclass
class SolveResult:
    leftover: tuple[Given, ...]
    evidence: dict[str, Evidence]
    trace: list[TraceStep] = field(default_factory=list)


def _names(gs: tuple[Given, ...]) -> tuple[str, ...]:
    return tuple(g.render() for g in gs)


class Solver:
    """One solver run.  ``_oldest_first`` flips ATOM-ONE to pick the oldest
    matching given; it exists only so tests can show the order matters."""

    def __init__(self, site_pos: dict[str, Pos] | None = None, *, _oldest_first: bool = False):
        self.site_pos = site_pos or {}
        self.oldest_first = _oldest_first
        self.trace: list[TraceStep] = []
        self.evidence: dict[str, Evidence] = {}
        self.consumed: set[Atom] = set()
        self._anon = 0

    # -- errors ---------------------------------------------------------------

    def _fail(self, kind: str, msg: str, atoms: tuple = (), site: str | None = None) -> SolveError:
        pos = self.site_pos.get(site) if site else None
        return SolveError(kind, msg, atoms, pos, site)

    # -- atomic solver ----------------------------------------------------------

    def solve_atomic(
        self, ctx: GivenContext, L: tuple[Given, ...], p: Mult, q: Atom, site: str | None = None
    ) -> tuple[tuple[Given, ...], Evidence]:
        in_u = [g for g in ctx.U if g.atom == q]
        in_l = [i for i, g in enumerate(L) if g.atom == q]
        in_d = [g for g in ctx.D if g.atom == q]
        wanted = f"{p.ascii}.{q.render()}"
        if in_u and (in_l or in_d):
            raise self._fail(
                "Ambiguous",
                f"{q.render()} is available both unrestricted and linearly; refusing to guess",
                (q,), site)
        if in_u:
            self.trace.append(TraceStep("ATOM-U", wanted, _names(L), _names(L)))
            return L, Evidence("U", in_u[0].name)
        if p is MANY:
            if in_l or in_d:
                raise self._fail(
                    "LinearForMany",
                    f"{q.render()} is needed unrestrictedly but only a linear given is in scope",
                    (q,), site)
            raise self._not_in_scope(q, site)
        if in_l:
            idx = in_l[-1] if self.oldest_first else in_l[0]
            out = L[:idx] + L[idx + 1:]
            self.consumed.add(q)
            self.trace.append(TraceStep("ATOM-ONE", wanted, _names(L), _names(out)))
            return out, Evidence("L", L[idx].name)
        if in_d and is_duplicable(q):
            self.trace.append(TraceStep("ATOM-DUP", wanted, _names(L), _names(L)))
            return L, Evidence("D", in_d[0].name)
        raise self._not_in_scope(q, site)

    def _not_in_scope(self, q: Atom, site: str | None) -> SolveError:
        if q in self.consumed:
            return self._fail("LinearOveruse", f"linear constraint {q.render()} is used more than once", (q,), site)
        return self._fail("NotInScope", f"no given for {q.render()}", (q,), site)

    # -- main solver ----------------------------------------------------------

    def solve(self, ctx: GivenContext, c: Wanted, L: tuple[Given, ...] | None = None) -> tuple[Given, ...]:
        """Return the unconsumed linear givens; evidence accumulates on self."""
        if L is None:
            L = ctx.L
        if isinstance(c, Simple):
            return self._solve_simple(ctx, L, c)
        if isinstance(c, Tensor):
            step = TraceStep("S-MULT", "*", _names(L), ())
            self.trace.append(step)
            mid = self.solve(ctx, c.left, L)
            out = self.solve(ctx, c.right, mid)
            step.after = _names(out)
            return out
        if isinstance(c, With):
            before = len(self.trace)
            out1 = self.solve(ctx, c.left, L)
            out2 = self.solve(ctx, c.right, L)
            if out1 != out2:
                diff = sorted({g.atom.render() for g in set(out1) ^ set(out2)})
                raise self._fail(
                    "BranchMismatch",
                    "case branches consume different linear constraints: " + ", ".join(diff),
                    tuple(diff), self._first_site(c))
            self.trace.insert(before, TraceStep("S-ADD", "&", _names(L), _names(out1)))
            return out1
        if isinstance(c, Impl):
            return self._solve_impl(ctx, L, c)
        raise TypeError(c)

    def _solve_simple(self, ctx: GivenContext, L: tuple[Given, ...], c: Simple) -> tuple[Given, ...]:
        many_sites: dict[Atom, list[Site]] = {}
        one_sites: dict[Atom, list[Site]] = {}
        for s in c.sites:
            (many_sites if s.mult is MANY else one_sites).setdefault(s.atom, []).append(s)
        for a in c.q.U:
            sites = many_sites.get(a, [])
            L, ev = self.solve_atomic(ctx, L, MANY, a, sites[0].id if sites else None)
            for s in sites:
                self.evidence[s.id] = ev
        for a in c.q.L:
            queue = one_sites.get(a, [])
            site = queue.pop(0) if queue else None
            L, ev = self.solve_atomic(ctx, L, ONE, a, site.id if site else None)
            if site:
                self.evidence[site.id] = ev
        return L

    def _label(self, c: Impl) -> str:
        if c.label:
            return c.label
        self._anon += 1
        return f"h{self._anon}"

    def _solve_impl(self, ctx: GivenContext, L: tuple[Given, ...], c: Impl) -> tuple[Given, ...]:
        label = self._label(c)
        new_u, new_d, new_l = [], [], []
        for m, a, name in impl_givens(label, c.assume):
            g = Given(a, name)
            if m is MANY:
                new_u.append(g)
            elif is_duplicable(a):
                new_d.append(g)
            else:
                new_l.append(g)
        wanted = f"{c.mult.ascii}.({c.assume.render()} => ...)"
        if c.mult is ONE:
            inner = GivenContext(tuple(new_u) + ctx.U, tuple(new_d) + ctx.D, ())
            start = tuple(new_l) + L
            self.trace.append(TraceStep("S-IMPLONE", wanted, _names(L), _names(start)))
            out = self.solve(inner, c.body, start)
            outer = set(L)
            leaked = [g for g in out if g not in outer]
            if leaked:
                raise self._fail(
                    "UnconsumedLinear",
                    "local linear constraint not consumed: " + ", ".join(g.atom.render() for g in leaked),
                    tuple(g.atom for g in leaked), self._where(label, c.body))
            return out
        inner = GivenContext(tuple(new_u) + ctx.U, tuple(new_d), ())
        start = tuple(new_l)
        self.trace.append(TraceStep("S-IMPLMANY", wanted, _names(L), _names(start)))
        out = self.solve(inner, c.body, start)
        if out:
            raise self._fail(
                "UnconsumedLinear",
                "linear constraint not consumed: " + ", ".join(g.atom.render() for g in out),
                tuple(g.atom for g in out), self._where(label, c.body))
        return L

    def _where(self, label: str, body: Wanted) -> str | None:
        return label if label in self.site_pos else self._first_site(body)

    def _first_site(self, c: Wanted) -> str | None:
        if isinstance(c, Simple):
            return c.sites[0].id if c.sites else None
        if isinstance(c, (Tensor, With)):
            return self._first_site(c.left) or self._first_site(c.right)
        return self._first_site(c.body)


def solve(ctx: GivenContext, c: Wanted, *, site_pos: dict[str, Pos] | None = None, _oldest_first: bool = False) -> SolveResult:
    s = Solver(site_pos, _oldest_first=_oldest_first)
    out = s.solve(ctx, c)
    return SolveResult(out, s.evidence, s.trace)


def solve_atomic(ctx: GivenContext, p: Mult, q: Atom) -> tuple[tuple[Given, ...], Evidence]:
    return Solver().solve_atomic(ctx, ctx.L, p, q)
