"""Hot loops behind distance verification.

Every kernel exists twice: a numba version (``*_nb``) and a numpy version
(``*_np``).  The public wrappers pick one according to ``_accel.USE_NUMBA``;
both must return identical results, including the witness pair, so the
choice of backend never changes a report.

Agreements rather than distances are counted throughout: ``limit`` is the
largest number of agreements a pair may have before it counts as a violation
(``n - t`` for a target distance ``t``); ``limit >= n`` disables early exit.
"""

import numpy as np

from . import _accel
from ._accel import njit, prange


# --------------------------------------------------------------------------
# all unordered pairs of one array

@njit(parallel=True)
def _pairwise_scan_nb(rows, limit):
    N, n = rows.shape
    best_agree = np.full(N, -1, np.int64)
    best_j = np.full(N, -1, np.int64)
    viol_j = np.full(N, -1, np.int64)
    for i in prange(N - 1):
        ba = -1
        bj = -1
        for j in range(i + 1, N):
            a = 0
            for x in range(n):  # branch-free so the loop vectorises
                a += rows[i, x] == rows[j, x]
            if a > limit:
                viol_j[i] = j
                break
            if a > ba:
                ba = a
                bj = j
        best_agree[i] = ba
        best_j[i] = bj
    return best_agree, best_j, viol_j


def _pairwise_scan_np(rows, limit):
    N = rows.shape[0]
    best_agree = np.full(N, -1, np.int64)
    best_j = np.full(N, -1, np.int64)
    viol_j = np.full(N, -1, np.int64)
    for i in range(N - 1):
        agree = (rows[i + 1:] == rows[i]).sum(axis=1)
        over = np.flatnonzero(agree > limit)
        if over.size:
            viol_j[i] = i + 1 + over[0]
            # a serial scan stops at the first violation; nothing later matters
            return best_agree, best_j, viol_j
        k = int(agree.argmax())
        best_agree[i] = agree[k]
        best_j[i] = i + 1 + k
    return best_agree, best_j, viol_j


def _pairs_before(N, i, j):
    """Number of pairs (a, b), a < b, lexicographically before (i, j), plus one."""
    return i * (N - 1) - i * (i - 1) // 2 + (j - i)


def pairwise_scan(rows, limit, backend=None):
    """Scan all unordered row pairs.

    Returns ``(max_agreements, i, j, pairs_checked, violated)``.  When
    ``violated`` is true, ``(i, j)`` is the lexicographically first pair with
    more than ``limit`` agreements and ``max_agreements`` is that pair's exact
    agreement count; otherwise ``(i, j)`` is the first pair attaining the
    maximum number of agreements.
    """
    rows = np.ascontiguousarray(rows)
    N, n = rows.shape
    if N < 2:
        return 0, None, None, 0, False
    use_nb = _accel.USE_NUMBA if backend is None else backend == "numba"
    scan = _pairwise_scan_nb if use_nb else _pairwise_scan_np
    best_agree, best_j, viol_j = scan(rows, int(limit))
    hit = np.flatnonzero(viol_j >= 0)
    total = N * (N - 1) // 2
    if hit.size:
        i = int(hit[0])
        j = int(viol_j[i])
        agree = int((rows[i] == rows[j]).sum())
        return agree, i, j, _pairs_before(N, i, j), True
    i = int(best_agree.argmax())
    return int(best_agree[i]), i, int(best_j[i]), total, False


# --------------------------------------------------------------------------
# all pairs of A x B

@njit(parallel=True)
def _cross_scan_nb(a_rows, b_rows, limit):
    NA, n = a_rows.shape
    NB = b_rows.shape[0]
    best_agree = np.full(NA, -1, np.int64)
    best_j = np.full(NA, -1, np.int64)
    viol_j = np.full(NA, -1, np.int64)
    for i in prange(NA):
        ba = -1
        bj = -1
        for j in range(NB):
            a = 0
            for x in range(n):
                a += a_rows[i, x] == b_rows[j, x]
            if a > limit:
                viol_j[i] = j
                break
            if a > ba:
                ba = a
                bj = j
        best_agree[i] = ba
        best_j[i] = bj
    return best_agree, best_j, viol_j


def _cross_scan_np(a_rows, b_rows, limit):
    NA = a_rows.shape[0]
    best_agree = np.full(NA, -1, np.int64)
    best_j = np.full(NA, -1, np.int64)
    viol_j = np.full(NA, -1, np.int64)
    for i in range(NA):
        agree = (b_rows == a_rows[i]).sum(axis=1)
        over = np.flatnonzero(agree > limit)
        if over.size:
            viol_j[i] = over[0]
            return best_agree, best_j, viol_j
        k = int(agree.argmax())
        best_agree[i] = agree[k]
        best_j[i] = k
    return best_agree, best_j, viol_j


def cross_scan(a_rows, b_rows, limit, backend=None):
    """Like :func:`pairwise_scan` over the product ``A x B``."""
    a_rows = np.ascontiguousarray(a_rows)
    b_rows = np.ascontiguousarray(b_rows)
    NA, NB = a_rows.shape[0], b_rows.shape[0]
    use_nb = _accel.USE_NUMBA if backend is None else backend == "numba"
    scan = _cross_scan_nb if use_nb else _cross_scan_np
    best_agree, best_j, viol_j = scan(a_rows, b_rows, int(limit))
    hit = np.flatnonzero(viol_j >= 0)
    if hit.size:
        i = int(hit[0])
        j = int(viol_j[i])
        agree = int((a_rows[i] == b_rows[j]).sum())
        return agree, i, j, i * NB + j + 1, True
    i = int(best_agree.argmax())
    return int(best_agree[i]), i, int(best_j[i]), NA * NB, False


# --------------------------------------------------------------------------
# fixed points of k o c for every k in a group (coset shortcut)

@njit(parallel=True)
def _fixed_counts_nb(group_rows, c):
    N, n = group_rows.shape
    out = np.zeros(N, np.int64)
    for k in prange(N):
        f = 0
        for x in range(n):
            if group_rows[k, c[x]] == x:
                f += 1
        out[k] = f
    return out


def _fixed_counts_np(group_rows, c):
    n = group_rows.shape[1]
    return (group_rows[:, c] == np.arange(n)).sum(axis=1).astype(np.int64)


def fixed_point_counts(group_rows, c, backend=None):
    """``out[k]`` = number of fixed points of ``group_rows[k] o c``."""
    group_rows = np.ascontiguousarray(group_rows)
    c = np.ascontiguousarray(c, dtype=np.int64)
    use_nb = _accel.USE_NUMBA if backend is None else backend == "numba"
    return (_fixed_counts_nb if use_nb else _fixed_counts_np)(group_rows, c)


# --------------------------------------------------------------------------
# distances for an explicit list of pairs (sampled verification)

@njit(parallel=True)
def _pair_distances_nb(rows, ii, jj):
    m = ii.shape[0]
    n = rows.shape[1]
    out = np.empty(m, np.int64)
    for t in prange(m):
        d = 0
        a = ii[t]
        b = jj[t]
        for x in range(n):
            if rows[a, x] != rows[b, x]:
                d += 1
        out[t] = d
    return out


def _pair_distances_np(rows, ii, jj, chunk=1 << 16):
    out = np.empty(ii.shape[0], np.int64)
    for s in range(0, ii.shape[0], chunk):
        e = s + chunk
        out[s:e] = (rows[ii[s:e]] != rows[jj[s:e]]).sum(axis=1)
    return out


def pair_distances(rows, ii, jj, backend=None):
    rows = np.ascontiguousarray(rows)
    ii = np.ascontiguousarray(ii, dtype=np.int64)
    jj = np.ascontiguousarray(jj, dtype=np.int64)
    use_nb = _accel.USE_NUMBA if backend is None else backend == "numba"
    return (_pair_distances_nb if use_nb else _pair_distances_np)(rows, ii, jj)
