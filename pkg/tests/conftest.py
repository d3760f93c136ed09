import datetime as dt

import numpy as np
import pytest
from hypothesis import settings

from mlrss.baseline import DesignSpec
from mlrss.profiles import ProfileBank, ProfileShape

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


class ConstantShape:
    """Stand-in profile with a fixed excess on every day of the span."""

    def __init__(self, value):
        self.value = value

    def curve(self, u):
        return np.full(np.shape(u), float(self.value))


@pytest.fixture
def flat_spec():
    # intercept + weekday only
    return DesignSpec(harmonic_frequencies=(), interaction_frequencies=())


@pytest.fixture
def gaussian_bank():
    thetas = [(30.0, 8.0, 10.0), (40.0, 9.0, 12.0), (50.0, 10.0, 14.0), (25.0, 7.0, 9.0)]
    return ProfileBank(tuple(ProfileShape("gaussian", th) for th in thetas))


@pytest.fixture
def start_date():
    return dt.date(2001, 1, 1)


ACCEPTANCE_LINES: dict[tuple[int, str], str] = {}


def report_criterion(number: int, name: str, ok: bool, detail: str) -> bool:
    """Record a one-line verdict that is echoed in the terminal summary."""
    ACCEPTANCE_LINES[number, name] = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
