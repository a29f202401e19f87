import time

import pytest
from hypothesis import settings

from starsec.fading import fit_user_gamma
from starsec.geometry import NetworkConfig
from starsec.simulator import simulate_channels

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

MC_TRIALS = 100_000
MC_SEED = 20240607

# lines appended by the acceptance module, echoed at the end of the run
ACCEPTANCE_LINES = []
# wall-clock seconds spent drawing the shared Monte Carlo realizations
TIMINGS = {}


@pytest.fixture(scope="session")
def cfg():
    return NetworkConfig()


@pytest.fixture(scope="session")
def stats(cfg):
    return fit_user_gamma(cfg.fading, cfg.N)


@pytest.fixture(scope="session")
def mc_default(cfg):
    """10^5 realizations at the default geometry, shared by every Monte Carlo comparison."""
    t0 = time.perf_counter()
    ch = simulate_channels(cfg, MC_TRIALS, MC_SEED)
    TIMINGS["mc_default"] = time.perf_counter() - t0
    return ch


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
