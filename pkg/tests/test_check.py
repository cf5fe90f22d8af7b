import pytest

from conftest import ACCEPT, REJECT, expected_class
from lqc.constraints import LINEARLY, all_sites, Atom, Impl, Simple, SimpleConstraint, Tensor, With, render_wanted
from lqc.errors import LqcError, SolveError
from lqc.generate import generate
from lqc.mult import MANY, ONE
from lqc.oracle import infer_program, usage_check
from lqc.pipeline import check_source
from lqc.solver import GivenContext, Solver
from lqc.syntax import parse

C, K = Atom("C"), Atom("K")


def kind_of(src):
    try:
        check_source(src)
    except LqcError as e:
        return e.kind
    return None


@pytest.mark.parametrize("path", ACCEPT, ids=lambda p: p.stem)
def test_corpus_accepts(path):
    assert check_source(path.read_text())


@pytest.mark.parametrize("path", REJECT, ids=lambda p: p.stem)
def test_corpus_rejects_with_class(path):
    assert kind_of(path.read_text()) == expected_class(path)


@pytest.mark.parametrize("src,kind", [
    ("main = 1 + True", "UnificationFailure"),
    ("main = y", "UnboundVariable"),
    ("f :: Int -o Int\nf x = 3", "LinearVariableUnused"),
    ("f :: Int -o (Int, Int)\nf x = (x, x)", "LinearVariableOverused"),
    ("f :: Bool -> Int -o Int\nf b x = if b then x else 3", "BranchUsageMismatch"),
    ("main = useC", "NotInScope"),
    ("f :: Int -> Int\nf x = x + 1", None),
])
def test_small_programs(src, kind):
    assert kind_of(src) == kind


def test_unrestricted_argument_may_feed_linear_function_twice():
    src = "f :: Int -o (Int, Int)\nf x = (x, 7)\ng :: Int -> ((Int, Int), (Int, Int))\ng x = (f x, f x)"
    assert kind_of(src) is None


def _generated(src):
    out = []
    for bd in infer_program(parse(src)):
        usage_check(bd)
        out.append(generate(bd))
    return out


def test_signature_becomes_unrestricted_implication():
    (g,) = _generated("overusing :: C =o (Int, Int)\noverusing = (useC, useC)")
    w = g.wanted
    assert isinstance(w, Impl) and w.mult is MANY
    assert w.assume == SimpleConstraint((), (C,))
    assert render_wanted(w).count("C") == 3


def test_case_generates_with():
    (g,) = _generated("d :: C =o Bool -> Int\nd x = if x then useC else 10")
    assert "&" in render_wanted(g.wanted)


def test_sites_are_stable():
    (g,) = _generated("overusing :: C =o (Int, Int)\noverusing = (useC, useC)")
    ids = [s.id for s in all_sites(g.wanted)]
    assert len(ids) == len(set(ids)) == 2
    assert all(i.startswith("overusing@r") for i in ids)


# -- the solver on hand-built problems --------------------------------------


def q(U=(), L=()):
    return SimpleConstraint(tuple(U), tuple(L))


def solve(c, U=(), D=(), L=(), **kw):
    s = Solver(**kw)
    out = s.solve(GivenContext.from_atoms(U, D, L), c)
    return [g.name for g in out], s


def test_atom_one_consumes_and_atom_u_does_not():
    assert solve(Simple(q(L=[C])), L=[C, K])[0] == ["l1"]
    assert solve(Simple(q(L=[C, C])), U=[C])[0] == []


def test_duplicable_from_d():
    left, s = solve(Simple(q(L=[LINEARLY, LINEARLY])), D=[LINEARLY])
    assert left == []
    assert [t.rule for t in s.trace] == ["ATOM-DUP", "ATOM-DUP"]


@pytest.mark.parametrize("c,ctx,kind", [
    (Simple(q(L=[C])), dict(U=[C], L=[C]), "Ambiguous"),
    (Simple(q(U=[C])), dict(L=[C]), "LinearForMany"),
    (Simple(q(L=[C, C])), dict(L=[C]), "LinearOveruse"),
    (Simple(q(L=[K])), dict(L=[C]), "NotInScope"),
    (With(Simple(q(L=[C])), Simple(q())), dict(L=[C]), "BranchMismatch"),
    (Impl(ONE, q(L=[K]), Simple(q())), dict(), "UnconsumedLinear"),
    (Impl(MANY, q(), Simple(q(L=[C]))), dict(L=[C]), "NotInScope"),
])
def test_solver_errors(c, ctx, kind):
    with pytest.raises(SolveError) as info:
        solve(c, **ctx)
    assert info.value.kind == kind


def test_implication_prefers_local_given():
    c = Impl(ONE, q(L=[C]), Simple(q(L=[C])))
    left, s = solve(c, L=[C])
    assert left == ["l0"]
    assert [t.rule for t in s.trace] == ["S-IMPLONE", "ATOM-ONE"]
    with pytest.raises(SolveError):
        solve(c, L=[C], _oldest_first=True)


def test_tensor_threads_leftovers():
    c = Tensor(Simple(q(L=[C])), Simple(q(L=[K])))
    assert solve(c, L=[K, C, C])[0] == ["l2"]
