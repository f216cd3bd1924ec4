import numpy as np
import pytest
from hypothesis import strategies as st

from mqsdeco import SingleModeDensity, SingleModePureState, TwoModeDensity, TwoModePureState


def random_vector(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density_matrix(rng, d, rank=None):
    rank = rank or d
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = a @ a.conj().T
    return m / np.trace(m).real


def random_pure(rng, n_max):
    return SingleModePureState(random_vector(rng, n_max + 1))


def random_density(rng, n_max, rank=None):
    return SingleModeDensity(random_density_matrix(rng, n_max + 1, rank))


def random_two_mode_pure(rng, n_max):
    return TwoModePureState(random_vector(rng, (n_max + 1) ** 2).reshape(n_max + 1, n_max + 1))


def random_two_mode_density(rng, n_max, rank=None):
    return TwoModeDensity(random_density_matrix(rng, (n_max + 1) ** 2, rank))


def random_unitary(a, b, c, d):
    """General 2x2 unitary from four angles."""
    return np.exp(1j * a) * np.array(
        [
            [np.exp(1j * b) * np.cos(d), np.exp(1j * c) * np.sin(d)],
            [-np.exp(-1j * c) * np.sin(d), np.exp(-1j * b) * np.cos(d)],
        ]
    )


angles = st.floats(min_value=0.0, max_value=2 * np.pi, allow_nan=False)
seeds = st.integers(min_value=0, max_value=2**32 - 1)
transmittivities = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
