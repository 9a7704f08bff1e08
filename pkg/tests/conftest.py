import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "clm", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("clm")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def small_table():
    """Class numbers for every fundamental |d| <= 2000."""
    from clm_lab.quadforms import build_table, fundamental_discriminants

    return build_table(fundamental_discriminants(-2000, 2000))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
