import random
from pathlib import Path

import pytest

from conftest import CORPUS
from lqc.core import CProgram
from lqc.elaborate import elaborate
from lqc.errors import RuntimeFault
from lqc.fuzz import random_program
from lqc.pipeline import check_source
from lqc.vm import UNIT, ConV, Machine, View, run, show_value

DATA = Path(__file__).parent / "data"


def run_source(src, **kw):
    return run(elaborate(check_source(src)), **kw)


def call(m, name, *args):
    f = m.prims[name]
    for a in args:
        f = m.apply(f, a)
    return f


def unpack_ur(v):
    assert isinstance(v.val, ConV) and v.val.name == "Ur"
    return v.val.args[0]


@pytest.fixture
def machine():
    return Machine(CProgram(()))


def test_write_read_free(machine):
    arr = unpack_ur(call(machine, "new", None, 3))
    call(machine, "write", None, arr, 1, 42)
    assert unpack_ur(call(machine, "read", None, arr, 1)) == 42
    assert call(machine, "free", None, arr) == UNIT


def test_faults(machine):
    arr = unpack_ur(call(machine, "new", None, 2))
    with pytest.raises(RuntimeFault) as info:
        call(machine, "read", None, arr, 0)
    assert info.value.kind == "UnsetRef"
    with pytest.raises(RuntimeFault) as info:
        call(machine, "write", None, arr, 2, 0)
    assert info.value.kind == "OutOfBounds"
    call(machine, "free", None, arr)
    with pytest.raises(RuntimeFault) as info:
        call(machine, "write", None, arr, 0, 0)
    assert info.value.kind == "UseAfterFree"


def test_split_shares_storage_and_join_restores(machine):
    arr = unpack_ur(call(machine, "new", None, 5))
    for i in range(5):
        call(machine, "write", None, arr, i, i)
    left, right = unpack_ur(call(machine, "split", None, arr, 2)).args
    assert (left.len, right.len) == (2, 3)
    call(machine, "write", None, right, 0, 99)
    assert unpack_ur(call(machine, "read", None, arr, 2)) == 99
    whole = unpack_ur(call(machine, "join", None, left, right))
    assert isinstance(whole, View) and (whole.off, whole.len) == (0, 5)
    with pytest.raises(RuntimeFault) as info:
        call(machine, "join", None, right, left)
    assert info.value.kind == "NonAdjacentJoin"


def test_shuffle_is_a_seeded_permutation():
    a, b = Machine(CProgram(()), seed=7), Machine(CProgram(()), seed=7)
    perm = [a.shuffle_at(64, i) for i in range(64)]
    assert sorted(perm) == list(range(64))
    assert perm == [b.shuffle_at(64, i) for i in range(64)]
    expected = list(range(64))
    random.Random(7).shuffle(expected)
    assert perm == expected


def test_show_value():
    assert show_value(ConV("Ur", (ConV("Pair", (1, -2)),))) == "Ur (1, -2)"
    assert show_value(ConV("Ur", (-5,))) == "Ur (-5)"
    assert show_value(UNIT) == "()"


@pytest.mark.parametrize("name,expected", [
    ("swap", "10\n40\n30\n20\nUr ()\n"),
    ("gf", "((41, 7), (41, 7))\n"),
    ("multiarray", "Ur 35\n"),
    ("read2", "Ur 42\n"),
])
def test_corpus_outputs(name, expected):
    assert run_source((CORPUS / "accept" / f"{name}.lql").read_text()).render() == expected


def test_quicksort_sorts_seeded_shuffle():
    res = run_source((CORPUS / "accept" / "quicksort.lql").read_text(), seed=7)
    assert res.output == [str(i) for i in range(64)]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_quicksort_other_seeds(seed):
    res = run_source((CORPUS / "accept" / "quicksort.lql").read_text(), seed=seed)
    assert res.output == [str(i) for i in range(64)]


def test_swap_every_pair():
    res = run_source((DATA / "swap_all_pairs.lql").read_text())
    got = [res.output[k:k + 8] for k in range(0, len(res.output), 8)]
    want = []
    for i in range(8):
        for j in range(8):
            cells = [10 * (k + 1) for k in range(8)]
            cells[i], cells[j] = cells[j], cells[i]
            want.append([str(c) for c in cells])
    assert got == want


def test_erased_tokens_give_same_result():
    src = (CORPUS / "accept" / "swap.lql").read_text()
    assert run_source(src).render() == run_source(src, erase_tokens=True).render()


def test_fuzzed_programs_match_model():
    rng = random.Random(5)
    for _ in range(15):
        src, expected = random_program(rng)
        assert run_source(src).render() == expected, src
