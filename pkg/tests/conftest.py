import pytest

from indoner.corpus import Sentence, Token


@pytest.fixture
def sentence():
    return Sentence([
        Token("Joko", "NNP", "B-PER"),
        Token("makan", "VBT", "O"),
        Token("di", "PPO", "O"),
        Token("Bandung", "NNP", "B-LOC"),
    ])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
