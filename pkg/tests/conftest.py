import numpy as np
import pytest

from qutrit_qst.config import RunConfig
from qutrit_qst.hilbert import SpaceLayout

NOISELESS = dict(
    g12_ratio=0.0,
    kappa_inverse_us=None,
    gamma_phi_e_inverse_us=None,
    gamma_phi_f_inverse_us=None,
    gamma_eg_inverse_us=None,
    gamma_fe_inverse_us=None,
    gamma_fg_inverse_us=None,
)


@pytest.fixture
def layout():
    return SpaceLayout(1)


@pytest.fixture
def paper_config():
    return RunConfig()


@pytest.fixture
def paper_params(paper_config):
    return paper_config.params()


@pytest.fixture
def noiseless_params():
    return RunConfig(**NOISELESS).params()


@pytest.fixture
def rng():
    return np.random.default_rng(20141015)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed in the terminal summary."""

    def _report(criterion, passed, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        return passed

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
