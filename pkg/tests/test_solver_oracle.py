import random

from hypothesis import given, settings, strategies as st

from lqc.constraints import Simple, SimpleConstraint, Tensor, depth, multiset_sub
from lqc.entail import OracleBudget, verdict
from lqc.errors import SolveError
from lqc.fuzz import random_instance
from lqc.solver import GivenContext, Solver

BUDGET = OracleBudget(max_atoms=8, max_depth=8, max_nodes=200_000)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_solver_success_is_confirmed_by_oracle(seed):
    inst = random_instance(random.Random(seed))
    try:
        left = Solver().solve(GivenContext.from_atoms(inst.U, inst.D, inst.L), inst.C)
    except SolveError:
        return
    out = tuple(g.atom for g in left)
    assert multiset_sub(out, inst.L)
    assert verdict(inst.given(), Tensor(inst.C, Simple(SimpleConstraint((), out))), BUDGET) != "false"


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_solver_is_deterministic(seed):
    inst = random_instance(random.Random(seed))
    ctx = GivenContext.from_atoms(inst.U, inst.D, inst.L)
    results = []
    for _ in range(2):
        s = Solver()
        try:
            results.append((s.solve(ctx, inst.C), [t.render() for t in s.trace], s.evidence))
        except SolveError as e:
            results.append((e.kind, str(e)))
    assert results[0] == results[1]


def test_fuzz_instances_respect_bounds():
    rng = random.Random(0)
    for _ in range(200):
        inst = random_instance(rng, max_atoms=4, max_depth=3)
        atoms = set(inst.U) | set(inst.D) | set(inst.L)
        assert len(atoms) <= 4
        assert depth(inst.C) <= 3
