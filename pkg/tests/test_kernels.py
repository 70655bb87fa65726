"""The numba and numpy kernels must agree bit for bit, including witnesses."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from permext import _accel, kernels

BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


def _rows(seed, N, n):
    rng = np.random.default_rng(seed)
    return np.array([rng.permutation(n) for _ in range(N)], dtype=np.uint16)


@given(st.integers(0, 10**6), st.integers(2, 40), st.integers(2, 12), st.integers(0, 12))
def test_pairwise_scan_backends_agree(seed, N, n, limit):
    rows = _rows(seed, N, n)
    limit = min(limit, n)
    out = {b: kernels.pairwise_scan(rows, limit, backend=b) for b in BACKENDS}
    assert len(set(out.values())) == 1
    agree, i, j, checked, violated = out["numpy"]
    if violated:
        assert (rows[i] == rows[j]).sum() > limit
        # no earlier pair (lexicographically) violates
        for a in range(N):
            for b in range(a + 1, N):
                if (a, b) >= (i, j):
                    break
                assert (rows[a] == rows[b]).sum() <= limit
    else:
        assert checked == N * (N - 1) // 2


@given(st.integers(0, 10**6), st.integers(1, 20), st.integers(1, 20), st.integers(2, 10))
def test_cross_scan_backends_agree(seed, NA, NB, n):
    a, b = _rows(seed, NA, n), _rows(seed + 1, NB, n)
    for limit in range(n + 1):
        res = {bk: kernels.cross_scan(a, b, limit, backend=bk) for bk in BACKENDS}
        assert len(set(res.values())) == 1


@given(st.integers(0, 10**6), st.integers(1, 50), st.integers(2, 12))
def test_fixed_point_counts_and_pair_distances(seed, N, n):
    rows = _rows(seed, N, n)
    c = np.random.default_rng(seed).permutation(n)
    fc = [kernels.fixed_point_counts(rows, c, backend=b) for b in BACKENDS]
    expect = (rows[:, c] == np.arange(n)).sum(axis=1)
    for f in fc:
        assert np.array_equal(f, expect)
    ii = np.random.default_rng(seed).integers(0, N, 30)
    jj = np.random.default_rng(seed + 1).integers(0, N, 30)
    for b in BACKENDS:
        assert np.array_equal(kernels.pair_distances(rows, ii, jj, backend=b),
                              (rows[ii] != rows[jj]).sum(axis=1))


def test_env_flag_selects_numpy():
    code = "from permext import _accel; print(_accel.backend_name())"
    env = dict(os.environ, PERMEXT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")
def test_set_threads_caps_pool():
    import numba

    _accel.set_threads(1)
    assert numba.get_num_threads() == 1
    _accel.set_threads(numba.config.NUMBA_NUM_THREADS)
