import pytest

from swclock.quantities import load_constants

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def constants():
    return load_constants()


@pytest.fixture(scope="session")
def rounded_constants():
    """Constants rounded so that hbar/c^2 is exactly 1e-48 g s."""
    c = 3e10
    return load_constants({"c": c, "hbar": 1e-48 * c**2})


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
