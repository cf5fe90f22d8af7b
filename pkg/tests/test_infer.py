import json

import pytest
from hypothesis import given, strategies as st

from lqc.errors import LqcError
from lqc.mult import MANY, ONE
from lqc.oracle import infer_program, u_add, u_drop, u_scale, usage_check
from lqc.syntax import parse
from lqc.types import render

usages = st.dictionaries(st.sampled_from("xyz"), st.sampled_from([ONE, MANY]), max_size=3)


@given(usages, usages)
def test_usage_addition_commutes(a, b):
    assert u_add(a, b) == u_add(b, a)


@given(usages, usages, usages)
def test_usage_addition_associates(a, b, c):
    assert u_add(u_add(a, b), c) == u_add(a, u_add(b, c))


@given(usages)
def test_usage_scaling(a):
    assert u_scale(ONE, a) == a
    assert set(u_scale(MANY, a).values()) <= {MANY}
    assert u_add(a, a) == u_scale(MANY, a)


def test_u_drop():
    assert u_drop({"x": ONE, "y": MANY}, "x") == {"y": MANY}


def infer(src):
    return {bd.name: bd for bd in infer_program(parse(src))}


def test_types_and_root_kinds():
    bds = infer("f :: Int -o (Int, Int)\nf x = (x, 7)\nmain = f 3")
    assert render(bds["f"].type) == "Int -o (Int, Int)"
    assert bds["f"].body.kind == "Abs"
    assert bds["main"].is_main and render(bds["main"].type) == "(Int, Int)"


def test_usage_check_accepts_well_used_bindings():
    for bd in infer("f :: Int -o (Int, Int)\nf x = (x, 7)").values():
        usage_check(bd)


def test_derivation_json_is_plain_data():
    (bd,) = infer("main = const 1 2").values()
    text = json.dumps(bd.to_json())
    assert '"kind": "App"' in text


@pytest.mark.parametrize("src,kind", [
    ("main = \\x -> x", "CannotInferLambda"),
    ("idf x = x\nmain = idf 3", "MissingSignature"),
    ("main = let pack (Ur a) = new 3 in a", "SkolemEscape"),
    ("main = 1 + True", "UnificationFailure"),
])
def test_inference_errors(src, kind):
    with pytest.raises(LqcError) as info:
        infer(src)
    assert info.value.kind == kind
