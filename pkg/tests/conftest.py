import warnings

import pytest

from bilinosc import LatticeConfig, SolveRequest, solve


def lattice(n_sites, lambda_c):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return LatticeConfig(n_sites, lambda_c)


@pytest.fixture(scope="session")
def small_cfg():
    return LatticeConfig(1001, 10.0)


@pytest.fixture(scope="session")
def small_spectrum(small_cfg):
    return solve(SolveRequest(small_cfg, n_eig=10, method="dense"))


@pytest.fixture(scope="session")
def desk_spectrum():
    return solve(SolveRequest(LatticeConfig(2001, 12.0), n_eig=20, method="dense"))


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
