import pytest

from conftest import ACCEPT, REJECT
from lqc.errors import ParseError
from lqc.syntax import Lam, Let, PackBind, SigBind, parse, parse_expr, parse_scheme, parse_type, pretty
from lqc.types import render


@pytest.mark.parametrize("path", ACCEPT + REJECT, ids=lambda p: p.stem)
def test_pretty_round_trip(path):
    prog = parse(path.read_text())
    text = pretty(prog)
    assert parse(text) == prog
    assert pretty(parse(text)) == text


def test_lambda_and_let_forms():
    e = parse_expr("\\x -> let pack (Ur a) = new 3 ; f :: RW n =o () ; f = free a in f")
    assert isinstance(e, Lam)
    body = e.body
    assert isinstance(body, Let)
    kinds = [type(b).__name__ for b in body.binds]
    assert kinds[0] == PackBind.__name__
    assert SigBind.__name__ in kinds


@pytest.mark.parametrize("text", [
    "Int -o Int",
    "Int -> Bool -> Int",
    "exists n. Ur (UArray Int n) * (RW n)",
])
def test_type_render_round_trip(text):
    t = parse_type(text)
    assert parse_type(render(t)) == t


def test_scheme_with_context():
    s = parse_scheme("Read n =o PArray a n -> Int")
    assert s.binders == ()
    assert [a.render() for a in s.assume.L] == ["Read n"]
    assert render(s.body) == "PArray a n -> Int"


@pytest.mark.parametrize("src", [
    "main = (1, ",
    "main = let in 3",
    "f :: Int -o\nf x = x",
    "main = \\ -> 1",
])
def test_parse_errors_have_positions(src):
    with pytest.raises(ParseError) as info:
        parse(src)
    assert info.value.pos is not None
    assert info.value.kind == "ParseError"
