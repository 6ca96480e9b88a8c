from __future__ import annotations

import warnings

import numpy as np
import pytest

from weberorr.fixtures import compliant_bump, stretched_grid
from weberorr.quadrature import TransformParams

# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical check")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def params():
    return TransformParams.default(1.0)


@pytest.fixture(scope="session")
def fine_grid():
    return stretched_grid(1.0, 30.0, 800, 0.005)


@pytest.fixture(scope="session")
def compliant(params, fine_grid):
    """Factory for no-slip-compliant bumps on the stretched grid."""

    def make(k, v_infinity=0.7, **kw):
        target = 1j * v_infinity * np.sign(k) if abs(k) == 1 else 0.0
        return compliant_bump(k, 1.0, fine_grid, target=target, params=params, **kw)

    return make


@pytest.fixture
def no_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        yield
