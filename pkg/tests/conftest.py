import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from viespec.media import EPS0, MU0, derive_background

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_configure(config):
    config._acceptance_lines = _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def vacuum_1ghz():
    return derive_background(0.0, EPS0, MU0, 2 * np.pi * 1e9)


@pytest.fixture(scope="session")
def lossy_1ghz():
    omega = 2 * np.pi * 1e9
    return derive_background(omega * EPS0, EPS0, MU0, omega)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def acceptance_log():
    return record_acceptance
