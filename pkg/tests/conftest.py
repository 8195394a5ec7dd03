import pytest
from hypothesis import HealthCheck, settings

from fraccomm.grid import TruncatedLine, default_family, make_domain, sample_family

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def line1024():
    return make_domain(1, TruncatedLine(20.0), 1024)


@pytest.fixture(scope="session")
def line512():
    return make_domain(1, TruncatedLine(20.0), 512)


@pytest.fixture(scope="session")
def family1024(line1024):
    return [sample_family(f, line1024) for f in default_family()]


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
