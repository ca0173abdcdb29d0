from functools import lru_cache

import numpy as np
import pytest

from crshadow.scenario import Geometry, PropagationEnv, Scenario

ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def env():
    return PropagationEnv(gamma=3.5, sigma_dB=8.0)


@pytest.fixture
def geom():
    return Geometry(R=1000.0, R0=1.0, Rc=50.0)


@pytest.fixture(scope="session")
def medium():
    return Scenario.from_config({"density_per_km2": 1000.0})


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


def brute_force_max_count(values, budget):
    """Largest subset size with sum <= budget, by enumerating every subset."""
    n = len(values)
    masks, sizes = _subset_masks(n)
    sums = masks @ np.asarray(values, dtype=float)
    return int(sizes[sums <= budget].max())


@lru_cache(maxsize=None)
def _subset_masks(n):
    masks = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(float)
    return masks, masks.sum(axis=1)
