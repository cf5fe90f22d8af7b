import itertools
import random
from functools import lru_cache

import pytest

from lqc.constraints import (
    EPS, LINEARLY, Atom, Impl, Simple, SimpleConstraint, Tensor, With, c_scale, is_duplicable, q_scale, q_tensor,
)
from lqc.entail import Inconclusive, OracleBudget, entails_simple, entails_wanted, verdict
from lqc.fuzz import random_q, random_wanted
from lqc.mult import MANY, ONE

C, C2, LIN = Atom("C"), Atom("C'"), LINEARLY
ALPHABET = (C, C2, LIN)


def Q(U=(), L=()):
    return SimpleConstraint(tuple(U), tuple(L))


def all_simple(max_linear=3):
    out = []
    for k in range(len(ALPHABET) + 1):
        for U in itertools.combinations(ALPHABET, k):
            for n in range(max_linear + 1):
                for L in itertools.combinations_with_replacement(ALPHABET, n):
                    out.append(Q(U, L))
    return out


DOMAIN = all_simple()


@lru_cache(maxsize=None)
def entailed(q):
    """Every element of DOMAIN that q entails."""
    return frozenset(x for x in DOMAIN if entails_simple(q, x))


def test_domain_size():
    # 8 choices of U times 20 multisets of size <= 3
    assert len(DOMAIN) == 160


# -- hand-picked cases ------------------------------------------------------


@pytest.mark.parametrize("q1,q2,expected", [
    (Q(L=[C]), Q(L=[C]), True),
    (Q(L=[C]), EPS, False),
    (Q(L=[LIN]), EPS, True),
    (Q(L=[LIN]), Q(L=[LIN, LIN]), True),
    (Q(L=[C]), Q(L=[C, C]), False),
    (Q(U=[C]), Q(L=[C, C]), True),
    (Q(U=[C], L=[C]), Q(L=[C]), True),
    (Q(U=[C], L=[C]), EPS, False),
    (Q(L=[C]), Q(U=[C]), False),
    (Q(L=[C, C2]), Q(L=[C2, C]), True),
])
def test_entails_simple_cases(q1, q2, expected):
    assert entails_simple(q1, q2) is expected


def test_with_shares_and_tensor_splits():
    q = Q(L=[C])
    assert entails_wanted(q, With(Simple(Q(L=[C])), Simple(Q(L=[C]))))
    assert not entails_wanted(q, Tensor(Simple(Q(L=[C])), Simple(Q(L=[C]))))
    assert entails_wanted(Q(L=[LIN]), Tensor(Simple(Q(L=[LIN])), Simple(Q(L=[LIN]))))


def test_implications():
    assert entails_wanted(EPS, Impl(ONE, Q(L=[C]), Simple(Q(L=[C]))))
    assert entails_wanted(EPS, Impl(MANY, Q(L=[C]), Simple(Q(L=[C]))))
    # a linear assumption cannot be captured by an unrestricted implication
    assert not entails_wanted(Q(L=[C2]), Impl(MANY, EPS, Simple(Q(L=[C2]))))
    assert entails_wanted(Q(L=[C2]), Impl(ONE, EPS, Simple(Q(L=[C2]))))


def test_budget_gives_inconclusive():
    c = Simple(EPS)
    for _ in range(4):
        c = Tensor(c, c)
    with pytest.raises(Inconclusive):
        entails_wanted(EPS, c, OracleBudget(max_depth=2))
    assert verdict(EPS, c, OracleBudget(max_depth=2)) == "inconclusive"
    assert verdict(Q(L=[C]), Simple(EPS)) == "false"


# -- requirements on the simple entailment relation ------------------------


def test_reflexive():
    assert all(entails_simple(q, q) for q in DOMAIN)


def test_cut():
    probes = all_simple(max_linear=1)
    for q1 in DOMAIN:
        for q2 in entailed(q1):
            for q in probes:
                assert entailed(q_tensor(q, q2)) <= entailed(q_tensor(q, q1)), (q, q1, q2)


def test_tensor_congruence():
    # pairs whose tensor still mentions at most three atoms
    small = [q for q in DOMAIN if len(q.U) + len(q.L) <= 3]
    for q1 in small:
        for q2 in small:
            if len(q1.U) + len(q1.L) + len(q2.U) + len(q2.L) > 3:
                continue
            both = q_tensor(q1, q2)
            for a in entailed(q1):
                for b in entailed(q2):
                    assert entails_simple(both, q_tensor(a, b)), (q1, q2, a, b)


def test_promoting_assumptions():
    for q1 in DOMAIN:
        assert entailed(q1) <= entailed(q_scale(MANY, q1))


def test_weakening_with_unrestricted():
    # ω·Q only depends on the atoms of Q, so one representative per set
    extras = {q_scale(MANY, x) for x in DOMAIN}
    assert len(extras) == 8
    for q1 in DOMAIN:
        for extra in extras:
            assert entailed(q1) <= entailed(q_tensor(extra, q1))


def test_duplicable_copy():
    for q in ALPHABET:
        assert entails_simple(Q(L=[q]), Q(L=[q, q])) is is_duplicable(q)


def test_duplicable_drop():
    for q in ALPHABET:
        assert entails_simple(Q(L=[q]), EPS) is is_duplicable(q)


# -- scaling against the oracle ---------------------------------------------

POOL = [C, C2, LIN]
BUDGET = OracleBudget(max_atoms=8, max_depth=8, max_nodes=50_000)


def _scaling_instances(seed, n):
    rng = random.Random(seed)
    for _ in range(n):
        q = random_q(rng, POOL, max_linear=3, p_u=0.3)
        c = random_wanted(rng, POOL, rng.randint(0, 3))
        yield rng.choice([ONE, MANY]), q, c


def test_scaling_preserves_entailment():
    hits = 0
    for p, q, c in _scaling_instances(62, 500):
        try:
            if not entails_wanted(q, c, BUDGET):
                continue
            hits += 1
            assert entails_wanted(q_scale(p, q), c_scale(p, c), BUDGET), (p, q, c)
        except Inconclusive:
            pass
    assert hits >= 50


def _scaled_inversion_holds(p, q, c):
    """The conclusion of scaling inversion, read up to a duplicable part."""
    if p is ONE:
        return entails_wanted(q, c, BUDGET)
    if not q.in_dup():
        return False
    q_prime = Q(U=q.U)
    rebuilt = q_tensor(q_scale(MANY, q_prime), Q(L=q.L))
    return rebuilt == q and entails_wanted(q_prime, c, BUDGET)


def test_scaling_inversion_up_to_duplicable():
    hits = 0
    for p, q, c in _scaling_instances(63, 500):
        try:
            if not entails_wanted(q, c_scale(p, c), BUDGET):
                continue
            hits += 1
            assert _scaled_inversion_holds(p, q, c), (p, q, c)
        except Inconclusive:
            pass
    assert hits >= 50


def test_scaling_inversion_literal_reading_fails():
    # (∅, {Linearly}) proves ω·ε, yet it is not ω times anything.
    q = Q(L=[LIN])
    assert entails_wanted(q, c_scale(MANY, Simple(EPS)))
    assert all(q_scale(MANY, x) != q for x in DOMAIN)
