from __future__ import annotations

import os

import pytest
from hypothesis import HealthCheck, settings

from mahlerkit.automaton import to_mahler_system
from mahlerkit.demos import demo_automaton, golden_field
from mahlerkit.exactalg import NumberField

settings.register_profile(
    "default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# filled by test_acceptance.py, printed after the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def K():
    return golden_field()


@pytest.fixture(scope="session")
def Q():
    return NumberField.rationals()


@pytest.fixture(scope="session")
def phi(K):
    return K.gen


@pytest.fixture(scope="session")
def thue3(K):
    return to_mahler_system(demo_automaton("thue3", K))


@pytest.fixture(scope="session")
def four(K):
    return to_mahler_system(demo_automaton("four-state", K))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
