import os
from importlib import resources

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def data_dir():
    return str(resources.files("permext").joinpath("data"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_min_distance(rows):
    rows = np.asarray(rows, dtype=np.int64)
    best = rows.shape[1]
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            best = min(best, int((rows[i] != rows[j]).sum()))
    return best


def brute_cross(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return int((a[:, None, :] != b[None, :, :]).sum(axis=2).min())


def greedy_instances(count=50, seed=0):
    """Random (blocks, k, q) instances: k distinct AGL(1,q) cyclic cosets."""
    from permext.groups import agl1, cyclic_coset_decomposition
    rng = np.random.default_rng(seed)
    out = []
    cache = {}
    for _ in range(count):
        q = int(rng.choice([5, 7, 8, 9, 11, 13]))
        k = int(rng.integers(2, int(np.sqrt(q)) + 1))
        if q not in cache:
            cache[q] = cyclic_coset_decomposition(agl1(q))
        idx = rng.choice(len(cache[q]), k, replace=False)
        out.append(([cache[q][i] for i in idx], k, q))
    return out


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
