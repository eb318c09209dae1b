"""Shared expensive fixtures and the acceptance summary printer."""

import pytest

from stochpension.fpe import Grid1D, Grid2D
from stochpension.model import CalibratedConstants
from stochpension.montecarlo import EulerConfig, simulate_consumption, simulate_fund
from stochpension.pension import solve_accumulation

# label -> (passed, detail), filled by test_acceptance.record() and printed after the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}

FUND_SEED = 2024
CONSUMPTION_SEED = 3


@pytest.fixture(scope="session")
def constants():
    return CalibratedConstants.paper_defaults()


@pytest.fixture(scope="session")
def accumulation(constants):
    return solve_accumulation(constants, Grid2D(), [10, 25, 40])


@pytest.fixture(scope="session")
def fund_mc(constants):
    cfg = EulerConfig(dt=0.02, horizon=40.0, n_paths=100_000, seed=FUND_SEED, record_times=(10.0, 25.0, 40.0))
    return simulate_fund(constants, cfg, initial_spread=(0.05, 0.05), domain=Grid2D().extent)


@pytest.fixture(scope="session")
def consumption_mc(constants):
    cache = {}

    def get(ratio: float):
        if ratio not in cache:
            cfg = EulerConfig(dt=0.01, horizon=60.0, n_paths=100_000, seed=CONSUMPTION_SEED, record_times=(60.0,))
            cache[ratio] = simulate_consumption(constants, ratio, cfg, initial_spread=0.05, x_max=Grid1D().x_max)
        return cache[ratio]

    return get


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[label]
        terminalreporter.write_line(f"{label}: {'PASS' if ok else 'FAIL'}  {detail}")
