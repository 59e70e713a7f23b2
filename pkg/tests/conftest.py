import numpy as np
import pytest

from brls.bath import SpectralDensity
from brls.nheig import decompose
from brls.operators import build_nh, tavis_cummings

# resonant test case: g_ec = 0.1 eV, lossy cavity, nearly lossless emitter
OMEGA = 2.0
GAMMA_C = 0.1
GAMMA_E = 1e-4


@pytest.fixture(scope="session")
def test_bath():
    return SpectralDensity.lorentzian(0.03, 0.2, 0.005)


@pytest.fixture(scope="session")
def tc_model(test_bath):
    return tavis_cummings(1, OMEGA, OMEGA, 0.1, GAMMA_C, GAMMA_E, sd=test_bath)


@pytest.fixture(scope="session")
def tc_eig(tc_model):
    return decompose(build_nh(tc_model))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + a.conj().T)


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
