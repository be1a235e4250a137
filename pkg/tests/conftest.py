import pytest

from planarperc.weights import preset, solve_admissibility

# filled by test_acceptance; printed once at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def crit():
    return solve_admissibility(preset("crit-quad"))


@pytest.fixture(scope="session")
def subcrit():
    return solve_admissibility(preset("subcrit-quad(1/16)"))


@pytest.fixture(scope="session")
def mixed():
    return solve_admissibility(preset("mixed"))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
