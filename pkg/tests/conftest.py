import warnings

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("openqbm", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("openqbm")

#: One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE_LINES = {}


def record_acceptance(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(autouse=True)
def _quiet_leakage():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="boundary leakage")
        yield
