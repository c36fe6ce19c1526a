import numpy as np
import pytest

from blindqkd.quantum import PolarizationState, RngStream

SIGMA_Y = np.array([[0, -1j], [1j, 0]])


def u_y(angle):
    """cos(a) I - i sin(a) sigma_y, built from the Pauli matrix."""
    return np.cos(angle) * np.eye(2) - 1j * np.sin(angle) * SIGMA_Y


def oracle_state(angle, start=(1, 0)):
    return u_y(angle) @ np.array(start, dtype=complex)


def as_vec(state: PolarizationState):
    return np.array([state.amp0, state.amp1])


@pytest.fixture
def rng():
    return RngStream(1234)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
