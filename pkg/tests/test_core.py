import pytest

from conftest import ACCEPT
from lqc.core import lint_program, parse_core, show_program
from lqc.elaborate import elaborate
from lqc.errors import LintError
from lqc.pipeline import check_source


def core_of(path):
    return elaborate(check_source(path.read_text()))


@pytest.mark.parametrize("path", ACCEPT, ids=lambda p: p.stem)
def test_printed_core_reparses_and_lints(path):
    prog = core_of(path)
    text = show_program(prog)
    again = parse_core(text)
    assert again == prog
    assert show_program(again) == text
    assert lint_program(again) == lint_program(prog)


@pytest.mark.parametrize("src,kind", [
    ("(def bad (-> 1 Int (Pair Int Int)) (lam x 1 Int (app (app (con Pair Int Int) (var x)) (var x))))",
     "LintLinearity"),
    ("(def bad (-> 1 Int Int) (lam x 1 Int 3))", "LintLinearity"),
    ("(def bad (-> 1 (tok C) Int) (lam t 1 (tok C) 3))", "LintLinearity"),
    ("(def bad Int (var nope))", "LintUnbound"),
    ("(def bad Int (con True))", "LintType"),
    ("(def bad Int)", "CoreSyntax"),
])
def test_lint_rejects(src, kind):
    with pytest.raises(LintError) as info:
        lint_program(parse_core(src))
    assert info.value.kind == kind


def test_unrestricted_binder_may_be_shared():
    src = "(def ok (-> w Int (Pair Int Int)) (lam x w Int (app (app (con Pair Int Int) (var x)) (var x))))"
    assert "ok" in lint_program(parse_core(src))


def test_linear_value_cannot_flow_into_unrestricted_argument():
    src = """
    (def f (-> w Int Int) (lam x w Int (var x)))
    (def bad (-> 1 Int Int) (lam y 1 Int (app (var f) (var y))))
    """
    with pytest.raises(LintError) as info:
        lint_program(parse_core(src))
    assert info.value.kind == "LintLinearity"


def test_evidence_argument_is_checked():
    # useC wants a C token; handing it an Int must fail
    with pytest.raises(LintError):
        lint_program(parse_core("(def bad Int (app (var useC) 3))"))
