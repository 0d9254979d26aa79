import numpy as np
import pytest

from satsense import Medium, ProbeState

ACCEPTANCE_LINES = []


def random_cases(n, seed, R_max=10.0, r_max=2.0):
    """Randomized (state, medium, delta_bar) triples over the tested parameter box."""
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(n):
        state = ProbeState(R=rng.uniform(0, R_max), theta=rng.uniform(-np.pi, np.pi),
                           r=rng.uniform(0, r_max), psi=rng.uniform(-np.pi, np.pi))
        medium = Medium(T=10 ** rng.uniform(-2, 2), n_sat=10 ** rng.uniform(-2, 2))
        cases.append((state, medium, rng.uniform(-5, 5)))
    return cases


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
