import numpy as np
import pytest

from sovlab.instances import default_chart
from sovlab.lambda_conn import random_point
from sovlab.scenario import rng_from_seed

# lines reported by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def chart():
    return default_chart(1.0)


@pytest.fixture(scope="session")
def chart0():
    return default_chart(0.0)


@pytest.fixture(scope="session")
def point(chart):
    return random_point(chart, rng_from_seed(101))


@pytest.fixture(scope="session")
def point0(chart0):
    return random_point(chart0, rng_from_seed(102))


@pytest.fixture(scope="session")
def curve(chart):
    return chart.curve


@pytest.fixture
def rng():
    return rng_from_seed(12345)

