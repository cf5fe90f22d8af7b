import itertools
import random

import pytest

from lqc.constraints import LINEARLY, Atom
from lqc.core import CApp, CCase, CLam, CVar, ev_type_of, lint_program, lint_term
from lqc.elaborate import coerce_ur, elaborate, occurrences, scaled_ev_type, thread_dup
from lqc.fuzz import random_program
from lqc.mult import MANY, ONE
from lqc.pipeline import check_source
from lqc.types import ur_t

A, B = Atom("C"), Atom("K")


def _fresh():
    counter = itertools.count()
    return lambda base: f"%{base}{next(counter)}"


@pytest.mark.parametrize("comps", [
    [],
    [(ONE, A)],
    [(MANY, A)],
    [(ONE, A), (MANY, B)],
    [(MANY, A), (ONE, B), (ONE, LINEARLY)],
])
def test_coerce_ur_has_the_promised_type(comps):
    arg = scaled_ev_type(comps)
    t = lint_term(CLam("e", ONE, arg, coerce_ur(CVar("e"), comps)))
    assert t.arg == arg
    assert t.res == ur_t(ev_type_of(comps))


def test_thread_dup_gives_one_use_per_path():
    body = CApp(CApp(CVar("pairL"), CVar("d")), CVar("d"))
    threaded = thread_dup(body, "d", _fresh())
    assert occurrences(threaded, "d") == 1
    assert "dupL" in repr(threaded)
    dropped = thread_dup(CVar("x"), "d", _fresh())
    assert isinstance(dropped, CCase) and "dropL" in repr(dropped)


def test_fuzzed_programs_elaborate_and_lint():
    rng = random.Random(11)
    for _ in range(20):
        src, _expected = random_program(rng)
        prog = elaborate(check_source(src))
        assert set(lint_program(prog)) == {d.name for d in prog.defs}
