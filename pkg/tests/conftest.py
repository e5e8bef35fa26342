import pytest

from ltrae.optimizer import optimize_degree_distribution

# pass/fail lines recorded by test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def opt2():
    return optimize_degree_distribution(2)


@pytest.fixture(scope="session")
def opt10():
    return optimize_degree_distribution(10)


@pytest.fixture(scope="session")
def opt100():
    return optimize_degree_distribution(100)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
