"""Shared fixtures for the rwlab test suite.

The `verdicts` fixture collects one line per acceptance check; a terminal
summary hook prints them after the run so the pass/fail verdicts are
visible even when pytest captures stdout.
"""

from __future__ import annotations

import pytest

from rwlab.category import RewritingCategory
from rwlab.parser import parse_statement
from rwlab.rules import DEFAULT_RULES

VERDICT_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if VERDICT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in VERDICT_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def verdicts() -> list[str]:
    return VERDICT_LINES


def restricted_category(*rule_ids: str, **kwargs) -> RewritingCategory:
    return RewritingCategory(
        rules={name: DEFAULT_RULES[name] for name in rule_ids}, **kwargs
    )


@pytest.fixture(scope="session")
def category() -> RewritingCategory:
    return RewritingCategory()


@pytest.fixture(scope="session")
def worked_statement():
    """The running example: a hypothesis and its mirrored goal."""
    return parse_statement("thm a (x:0..3) (h0: x + 1 = 3) : 3 = x + 1")


@pytest.fixture(scope="session")
def echo_statement():
    """Goal repeats the hypothesis verbatim, so close_hyp applies at once.

    Its 4-element class under {add_comm} is the documented witness class:
    commuting either side removes the immediate closer, which makes the
    text-conditioned prover's success rate collapse on those members.
    """
    return parse_statement("thm echo (x:0..3) (h0: x + 1 = 3) : x + 1 = 3")
