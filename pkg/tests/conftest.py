import pytest

from gametree.payoff import PayoffSpec, build
from gametree.volatility import make_truncated_cev

# Reference contracts: K=100, penalty 12, r=6%, T=2 under the truncated CEV model.
STRIKE, PENALTY, RATE, MATURITY = 100.0, 12.0, 0.06, 2.0


def reference_spec(kind, convention="undiscounted_strike"):
    return PayoffSpec(kind, STRIKE, MATURITY, RATE, PENALTY, convention)


@pytest.fixture(scope="session")
def cev():
    return make_truncated_cev()


@pytest.fixture(scope="session")
def game_call():
    return build(reference_spec("game_call"))


@pytest.fixture(scope="session")
def game_put():
    return build(reference_spec("game_put"))


# acceptance verdicts, collected by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
