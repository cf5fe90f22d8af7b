import itertools

from hypothesis import given, strategies as st

from lqc.constraints import LINEARLY, Atom, Impl, Simple, SimpleConstraint, Tensor, With, c_scale, q_scale
from lqc.mult import MANY, ONE, Mult, mult_add, mult_mul

mults = st.sampled_from([ONE, MANY])
ATOMS = [Atom("C"), Atom("C'"), LINEARLY]


def test_semiring_tables():
    assert mult_add(ONE, ONE) is MANY
    assert mult_add(ONE, MANY) is MANY
    assert mult_mul(ONE, ONE) is ONE
    assert mult_mul(ONE, MANY) is MANY
    assert mult_mul(MANY, ONE) is MANY
    assert mult_mul(MANY, MANY) is MANY


def test_semiring_laws():
    ms = [ONE, MANY]
    for a, b, c in itertools.product(ms, repeat=3):
        assert mult_add(a, b) == mult_add(b, a)
        assert mult_mul(mult_mul(a, b), c) == mult_mul(a, mult_mul(b, c))
        assert mult_mul(a, mult_add(b, c)) == mult_add(mult_mul(a, b), mult_mul(a, c))
        assert mult_mul(ONE, a) == a == mult_mul(a, ONE)


def test_ascii_round_trip():
    for m in Mult:
        assert Mult.from_ascii(m.ascii) is m
    assert Mult.from_ascii("ω") is MANY


def _all_q(max_linear=3):
    for k in range(len(ATOMS) + 1):
        for U in itertools.combinations(ATOMS, k):
            for n in range(max_linear + 1):
                for L in itertools.combinations_with_replacement(ATOMS, n):
                    yield SimpleConstraint(U, L)


def test_q_scale_composes_exhaustively():
    for q in _all_q():
        for p, r in itertools.product([ONE, MANY], repeat=2):
            assert q_scale(p, q_scale(r, q)) == q_scale(mult_mul(p, r), q)


simple_q = st.builds(
    SimpleConstraint,
    st.lists(st.sampled_from(ATOMS), max_size=3).map(tuple),
    st.lists(st.sampled_from(ATOMS), max_size=3).map(tuple),
)
wanted = st.recursive(
    simple_q.map(Simple),
    lambda inner: st.one_of(
        st.builds(Tensor, inner, inner),
        st.builds(With, inner, inner),
        st.builds(Impl, mults, simple_q, inner),
    ),
    max_leaves=6,
)


@given(mults, mults, wanted)
def test_c_scale_composes(p, r, c):
    assert c_scale(p, c_scale(r, c)) == c_scale(mult_mul(p, r), c)


@given(wanted)
def test_scaling_by_one_is_identity(c):
    assert c_scale(ONE, c) == c
