import math

import pytest
from hypothesis import HealthCheck, settings

from resetpid.lti import second_order_plant
from resetpid.loopshape import DesignSpec, pid_comparator, reset_pid_a, reset_pid_b

settings.register_profile("default", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

WC = 2 * math.pi * 150


@pytest.fixture(scope="session")
def plant():
    return second_order_plant()[0]


@pytest.fixture(scope="session")
def spec():
    return DesignSpec(WC)


@pytest.fixture(scope="session")
def controllers(plant, spec):
    pid = pid_comparator(spec, plant)
    return {"PID": pid, "A": reset_pid_a(spec, plant), "B": reset_pid_b(spec, plant, pid)}


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
