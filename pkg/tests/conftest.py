from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
ACCEPT = sorted((CORPUS / "accept").glob("*.lql"))
REJECT = sorted((CORPUS / "reject").glob("*.lql"))


def expected_class(path: Path) -> str:
    return path.with_suffix(".expected").read_text().strip()


@pytest.fixture
def corpus_dir():
    return CORPUS


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
