import pytest

from netsup.automata import ControlConstraint
from netsup.guideway import guideway_transformed
from netsup.synthesis import SynthesisProblem, synthesize_supremal


@pytest.fixture(scope="session")
def guideway_problem():
    tp, bad = guideway_transformed()
    return tp, SynthesisProblem(tp.automaton, ControlConstraint.networked(tp.alph), bad)


@pytest.fixture(scope="session")
def guideway_sup(guideway_problem):
    _tp, problem = guideway_problem
    return synthesize_supremal(problem)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
