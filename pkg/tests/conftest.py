import time

import pytest

from mctail.mcgrid import GridSpec, save_grid, simulate_grid

ACCEPTANCE_LINES: list[str] = []
BUILD_SECONDS: dict[str, float] = {}


def pytest_addoption(parser):
    parser.addoption("--long-run", action="store_true", default=False,
                     help="run the 10^5/10^6 studies (hours of compute at full scale)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long-run"):
        return
    skip = pytest.mark.skip(reason="needs --long-run")
    for item in items:
        if "long_run" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    def record(tag: str, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"{tag}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


@pytest.fixture(scope="session")
def default_spec():
    return GridSpec(n=1000)


@pytest.fixture(scope="session")
def default_grid(default_spec):
    """Full-size grid at n=1000: 100 alpha0 values x 1000 replications."""
    t0 = time.perf_counter()
    grid = simulate_grid(default_spec)
    BUILD_SECONDS["default_grid"] = time.perf_counter() - t0
    return grid


@pytest.fixture(scope="session")
def default_grid_path(default_grid, tmp_path_factory):
    return save_grid(default_grid, tmp_path_factory.mktemp("grid") / "n1000.grid")


@pytest.fixture(scope="session")
def small_spec():
    return GridSpec(n=400, alpha0_values=(1.2, 1.5, 1.8, 2.0), replications=60, master_seed=7)


@pytest.fixture(scope="session")
def small_grid(small_spec):
    return simulate_grid(small_spec)
