import pytest

from tfv import suite


@pytest.fixture(scope="session")
def suite_checks():
    """The full regression suite at the default seed, computed once."""
    return suite.run_suite(seed=42)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
