import numpy as np
import pytest

from darkcqed.effective import at_resonance
from darkcqed.hilbert import SystemParams

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def make_set_a(**kw):
    base = dict(g=1.0, J=5.0, delta1=1000.0, delta2=0.0, kappa1=100.0,
                kappa2=1e-3, gamma=1e-3)
    base.update(kw)
    return at_resonance(SystemParams(**base))


def make_set_b(**kw):
    base = dict(g=1.0, J=5.0, delta1=100.0, delta2=0.0, kappa1=10.0,
                kappa2=1e-3, gamma=1e-3)
    base.update(kw)
    return at_resonance(SystemParams(**base))


@pytest.fixture
def set_a():
    return make_set_a()


@pytest.fixture
def set_b():
    return make_set_b()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density_matrix(rng, d):
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
