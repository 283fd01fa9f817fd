import os
from pathlib import Path

import pytest

from taxoclean.network import parse_network
from taxoclean.wordnet import load_wordnet

FIXTURES = Path(__file__).parent / "fixtures"
REAL_WORDNET = Path(os.environ.get("TAXOCLEAN_WORDNET", "/root/wordnet30"))


@pytest.fixture(scope="session")
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def universe():
    with open(FIXTURES / "synthetic_universe.tsv", encoding="utf-8") as fh:
        return parse_network(fh)


@pytest.fixture(scope="session")
def mini_wn():
    return load_wordnet(FIXTURES / "mini_wordnet.tsv")


@pytest.fixture(scope="session")
def real_wn():
    if not (REAL_WORDNET / "data.noun").exists():
        pytest.skip("WordNet 3.0 flat files not available (set TAXOCLEAN_WORDNET)")
    return load_wordnet(REAL_WORDNET)


# Acceptance criteria report: tests/test_acceptance.py records one line per
# criterion here and the lines are echoed in the terminal summary.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
