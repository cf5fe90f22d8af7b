import json

import pytest
from click.testing import CliRunner

from conftest import ACCEPT, CORPUS, REJECT, expected_class
from lqc.cli import cli, main


@pytest.fixture
def runner():
    return CliRunner()


@pytest.mark.parametrize("path", ACCEPT, ids=lambda p: p.stem)
def test_check_accepts(runner, path):
    r = runner.invoke(cli, ["check", str(path)])
    assert r.exit_code == 0, r.output
    assert r.stdout.rstrip().endswith(": ok")


@pytest.mark.parametrize("path", REJECT, ids=lambda p: p.stem)
def test_check_rejects_with_class(runner, path):
    r = runner.invoke(cli, ["check", str(path)])
    assert r.exit_code == 1
    assert f": {expected_class(path)}: " in r.stderr


def test_oldest_first_breaks_shadowing(runner):
    path = str(CORPUS / "accept" / "shadowing.lql")
    assert runner.invoke(cli, ["check", path]).exit_code == 0
    r = runner.invoke(cli, ["check", "--oldest-first", path])
    assert r.exit_code == 1
    assert "UnconsumedLinear" in r.stderr


def test_dump_json_lists_sites_and_trace(runner):
    r = runner.invoke(cli, ["check", "--dump-json", str(CORPUS / "accept" / "shadowing.lql")])
    (main_binding,) = json.loads(r.stdout)
    assert main_binding["binding"] == "main"
    assert all(s["evidence"] for s in main_binding["sites"])
    assert {t["rule"] for t in main_binding["trace"]} >= {"S-IMPLONE", "ATOM-ONE"}


def test_dump_derivation(runner):
    r = runner.invoke(cli, ["check", "--dump-derivation", str(CORPUS / "accept" / "gf.lql")])
    ds = json.loads(r.stdout)
    assert [d["binding"] for d in ds] == ["f", "g", "main"]
    assert ds[0]["scheme"]["type"] == "Int -o (Int, Int)"
    assert ds[0]["derivation"]["kind"] == "Abs"


@pytest.mark.parametrize("cmd", [["constraints"], ["constraints", "--json"], ["trace"], ["trace", "--json"],
                                 ["elaborate"], ["elaborate", "--json"], ["lint"]])
def test_subcommands_succeed(runner, cmd):
    r = runner.invoke(cli, cmd + [str(CORPUS / "accept" / "swap.lql")])
    assert r.exit_code == 0, r.output
    assert r.stdout


def test_run_and_core_lint(runner, tmp_path):
    src = CORPUS / "accept" / "swap.lql"
    r = runner.invoke(cli, ["run", str(src)])
    assert r.stdout == "10\n40\n30\n20\nUr ()\n"
    core = tmp_path / "swap.core"
    core.write_text(runner.invoke(cli, ["elaborate", str(src)]).stdout)
    assert runner.invoke(cli, ["lint", str(core)]).exit_code == 0
    assert runner.invoke(cli, ["run", "--erase-tokens", str(core)]).stdout == r.stdout


def test_run_seed(runner):
    r = runner.invoke(cli, ["run", "--seed", "7", str(CORPUS / "accept" / "quicksort.lql")])
    assert r.stdout.split()[:64] == [str(i) for i in range(64)]


def test_bad_core_exits_one(runner, tmp_path):
    bad = tmp_path / "bad.core"
    bad.write_text("(def bad (-> 1 Int Int) (lam x 1 Int 3))")
    r = runner.invoke(cli, ["lint", str(bad)])
    assert r.exit_code == 1
    assert "LintLinearity" in r.stderr


@pytest.mark.parametrize("given,wanted,expected", [
    ({"L": ["C"]}, {"L": ["C"]}, "true"),
    ({"L": ["C"]}, {"tensor": [{"L": ["C"]}, {"L": ["C"]}]}, "false"),
    ({"L": ["Linearly"]}, {"L": ["Linearly", "Linearly"]}, "true"),
])
def test_oracle_command(runner, tmp_path, given, wanted, expected):
    f = tmp_path / "q.json"
    f.write_text(json.dumps({"given": given, "wanted": wanted}))
    r = runner.invoke(cli, ["oracle", str(f)])
    assert r.stdout == expected + "\n"
    r = runner.invoke(cli, ["oracle", "--compare", str(f)])
    assert r.stdout.splitlines()[1].startswith("solver: ")


def test_oracle_budget(runner, tmp_path):
    deep = {"L": ["C"]}
    for _ in range(10):
        deep = {"tensor": [deep, {"U": []}]}
    f = tmp_path / "q.json"
    f.write_text(json.dumps({"given": {"L": ["C"]}, "wanted": deep}))
    assert runner.invoke(cli, ["oracle", str(f)]).stdout == "inconclusive\n"


def test_main_returns_exit_codes(capsys):
    assert main(["check", str(CORPUS / "accept" / "gf.lql")]) == 0
    assert main(["check", str(CORPUS / "reject" / "overusing.lql")]) == 1
    assert main(["check", "/nonexistent.lql"]) == 2
