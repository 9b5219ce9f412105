import pytest

from bldc_ann.sim import SimConfig, run_simulation


@pytest.fixture(scope="session")
def default_trace():
    return run_simulation(SimConfig())


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.REPORT:
            terminalreporter.write_line(line)
