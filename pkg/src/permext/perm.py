"""Permutations, permutation arrays and Hamming-distance verification.

A permutation on ``Z_n`` is stored as a length-``n`` integer vector whose
entry ``x`` is the image of ``x``.  A :class:`PermutationArray` stacks such
rows into a read-only ``(N, n)`` uint16 matrix.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels

MAX_N = 1024
SYMBOL_DTYPE = np.uint16
DEFAULT_SAMPLE_PAIRS = 10**6


class PermutationError(ValueError):
    """Raised when rows are not bijections or shapes disagree."""


def _as_row(p, name="permutation"):
    arr = np.asarray(p)
    if arr.ndim != 1:
        raise PermutationError(f"{name} must be one-dimensional")
    return arr.astype(np.int64, copy=False)


def is_permutation(p) -> bool:
    arr = np.asarray(p)
    if arr.ndim != 1:
        return False
    n = arr.shape[0]
    if n == 0:
        return True
    if arr.min() < 0 or arr.max() >= n:
        return False
    return np.bincount(arr.astype(np.int64), minlength=n).max() == 1


def check_permutation(p, name="permutation"):
    arr = _as_row(p, name)
    if not is_permutation(arr):
        raise PermutationError(f"{name} is not a permutation of Z_{arr.shape[0]}")
    return arr


def identity(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def hamming_distance(a: Sequence[int], b: Sequence[int]) -> int:
    """Number of positions where ``a`` and ``b`` differ.

    Any equal-length sequences are accepted, bijective or not.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise PermutationError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def compose(f, g) -> np.ndarray:
    """``(f o g)(x) = f(g(x))``."""
    f = check_permutation(f, "f")
    g = check_permutation(g, "g")
    if f.shape != g.shape:
        raise PermutationError("length mismatch in compose")
    return f[g]


def inverse(f) -> np.ndarray:
    f = check_permutation(f)
    inv = np.empty_like(f)
    inv[f] = np.arange(f.shape[0])
    return inv


def fixed_points(f) -> int:
    f = np.asarray(f)
    return int(np.count_nonzero(f == np.arange(f.shape[0])))


class PermutationArray:
    """Immutable, duplicate-free stack of permutations of one length.

    ``meta`` carries free-form provenance (family, q, labels, ...) that the
    PA text writer turns into ``# key=value`` header lines.
    """

    __slots__ = ("_rows", "meta", "certified_min_distance", "_report")

    def __init__(self, rows, n=None, *, meta=None, validate=True):
        try:
            arr = np.asarray(rows)
        except ValueError:
            raise PermutationError("rows have inconsistent lengths") from None
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, 0 if n is None else n)
        if arr.ndim != 2:
            raise PermutationError("rows must form a 2-d array")
        if n is not None and arr.shape[0] and arr.shape[1] != n:
            raise PermutationError(f"rows have length {arr.shape[1]}, expected {n}")
        if n is None:
            n = arr.shape[1]
        if arr.shape[0] == 0:
            arr = arr.reshape(0, n)
        if n > MAX_N:
            raise PermutationError(f"n={n} exceeds the supported maximum {MAX_N}")
        if validate and arr.size:
            if arr.min() < 0 or arr.max() >= n:
                raise PermutationError("symbol out of range")
            arr16 = arr.astype(SYMBOL_DTYPE)
            srt = np.sort(arr16, axis=1)
            bad = np.flatnonzero((srt != np.arange(n, dtype=SYMBOL_DTYPE)).any(axis=1))
            if bad.size:
                raise PermutationError(f"row {int(bad[0])} is not a permutation")
            _check_unique(arr16)
            arr = arr16
        else:
            arr = arr.astype(SYMBOL_DTYPE, copy=False)
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self._rows = arr
        self.meta = dict(meta or {})
        self.certified_min_distance = None
        self._report = None

    # -- basic protocol ----------------------------------------------------
    @property
    def rows(self) -> np.ndarray:
        return self._rows

    @property
    def n(self) -> int:
        return self._rows.shape[1]

    def __len__(self):
        return self._rows.shape[0]

    def __iter__(self):
        return iter(self._rows)

    def __getitem__(self, idx):
        return self._rows[idx]

    def __eq__(self, other):
        if not isinstance(other, PermutationArray):
            return NotImplemented
        return self._rows.shape == other._rows.shape and bool(np.array_equal(self._rows, other._rows))

    def __hash__(self):
        return hash(self._rows.tobytes())

    def __repr__(self):
        return f"PermutationArray(n={self.n}, rows={len(self)})"

    def as_set(self):
        return {r.tobytes() for r in self._rows}

    def with_meta(self, **extra):
        out = PermutationArray(self._rows, self.n, meta={**self.meta, **extra}, validate=False)
        out.certified_min_distance = self.certified_min_distance
        out._report = self._report
        return out

    def certify(self, report: "DistanceReport"):
        """Attach a verification result; only verifiers call this."""
        # sampled checks are evidence, not proof, so they never certify
        if report.mode == "full" and report.exact:
            self.certified_min_distance = report.min_distance_found
        self._report = report
        return self

    @property
    def report(self):
        return self._report

    @classmethod
    def concat(cls, arrays, n=None, meta=None, validate=True):
        arrays = list(arrays)
        if n is None:
            if not arrays:
                raise PermutationError("cannot infer n from an empty list")
            n = arrays[0].n
        mats = [a.rows if isinstance(a, PermutationArray) else np.asarray(a) for a in arrays]
        mats = [m for m in mats if m.size]
        rows = np.concatenate(mats, axis=0) if mats else np.empty((0, n), SYMBOL_DTYPE)
        return cls(rows, n, meta=meta, validate=validate)


def _check_unique(arr):
    if arr.shape[0] < 2:
        return
    view = np.ascontiguousarray(arr).view(np.dtype((np.void, arr.dtype.itemsize * arr.shape[1]))).ravel()
    _, first, counts = np.unique(view, return_index=True, return_counts=True)
    if (counts > 1).any():
        dup = view[first[counts > 1][0]]
        hits = np.flatnonzero(view == dup)
        raise PermutationError(f"duplicate rows {int(hits[0])} and {int(hits[1])}")


def as_pa(obj, n=None) -> PermutationArray:
    if isinstance(obj, PermutationArray):
        return obj
    base = getattr(obj, "base", None)
    if isinstance(base, PermutationArray):
        return base
    return PermutationArray(obj, n)


@dataclass
class DistanceReport:
    mode: str
    min_distance_found: int
    pairs_checked: int
    witness_pair: Optional[tuple] = None
    sample_seed: Optional[int] = None
    claimed_d: Optional[int] = None
    passed: Optional[bool] = None
    exact: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "mode": self.mode,
            "min_distance_found": self.min_distance_found,
            "pairs_checked": self.pairs_checked,
            "witness_pair": list(self.witness_pair) if self.witness_pair else None,
            "sample_seed": self.sample_seed,
            "claimed_d": self.claimed_d,
            "passed": self.passed,
            "exact": self.exact,
            "details": self.details,
        }


def min_distance(A, early_exit_threshold: Optional[int] = None) -> DistanceReport:
    """Exact minimum distance over all unordered row pairs.

    With ``early_exit_threshold=t`` the scan stops at the lexicographically
    first pair closer than ``t``.  The report then carries that pair's
    distance with ``exact=False``: it only proves ``min < t``.  When no pair
    is closer than ``t`` the full minimum is still exact.
    """
    A = as_pa(A)
    if len(A) == 0:
        raise PermutationError("empty permutation array")
    n = A.n
    if len(A) == 1:
        return DistanceReport("full", n, 0, None, passed=None if early_exit_threshold is None else True,
                              claimed_d=early_exit_threshold)
    limit = n if early_exit_threshold is None else n - int(early_exit_threshold)
    agree, i, j, checked, violated = kernels.pairwise_scan(A.rows, limit)
    rep = DistanceReport("full", n - agree, checked, (i, j), claimed_d=early_exit_threshold,
                         exact=not violated)
    if early_exit_threshold is not None:
        rep.passed = not violated
    return rep


def cross_distance(A, B) -> int:
    A, B = as_pa(A), as_pa(B)
    if len(A) == 0 or len(B) == 0:
        raise PermutationError("empty permutation array")
    if A.n != B.n:
        raise PermutationError("length mismatch")
    agree, *_ = kernels.cross_scan(A.rows, B.rows, A.n)
    return A.n - agree


def cross_report(A, B, threshold: Optional[int] = None) -> DistanceReport:
    A, B = as_pa(A), as_pa(B)
    if A.n != B.n:
        raise PermutationError("length mismatch")
    limit = A.n if threshold is None else A.n - int(threshold)
    agree, i, j, checked, violated = kernels.cross_scan(A.rows, B.rows, limit)
    rep = DistanceReport("full", A.n - agree, checked, (i, j), claimed_d=threshold, exact=not violated)
    if threshold is not None:
        rep.passed = not violated
    return rep


# ---------------------------------------------------------------------------
# group / coset helpers

def _rows_of(G):
    rows = getattr(G, "rows", None)
    return rows if rows is not None else np.asarray(G)


def coset(G, rep) -> PermutationArray:
    """Rows ``g o rep`` for ``g`` in ``G``: the block ``G rep`` in row order of ``G``."""
    rows = _rows_of(G)
    rep = check_permutation(rep, "representative")
    return PermutationArray(rows[:, rep], rows.shape[1], validate=False)


def is_group(G) -> bool:
    """Closure, identity and inverses, checked exhaustively (small groups only)."""
    rows = _rows_of(G).astype(np.int64)
    N, n = rows.shape
    index = {r.astype(SYMBOL_DTYPE).tobytes() for r in rows}
    if identity(n).astype(SYMBOL_DTYPE).tobytes() not in index:
        return False
    for f in rows:
        if inverse(f).astype(SYMBOL_DTYPE).tobytes() not in index:
            return False
        prods = f[rows].astype(SYMBOL_DTYPE)
        for r in prods:
            if r.tobytes() not in index:
                return False
    return True


def coset_min_distance(G, alpha, beta, check_group: bool = False) -> int:
    """Minimum distance between ``G alpha`` and ``G beta`` in ``|G|`` work.

    ``hd(g alpha, h beta) = n - fix(h^-1 g alpha beta^-1)`` and ``h^-1 g``
    ranges over ``G``, so only the fixed points of ``k o c`` with
    ``c = alpha o beta^-1`` matter.
    """
    if check_group and not is_group(G):
        raise PermutationError("G is not closed under composition and inverse")
    rows = _rows_of(G)
    alpha = check_permutation(alpha, "alpha")
    beta = check_permutation(beta, "beta")
    c = alpha[inverse(beta)]
    fix = kernels.fixed_point_counts(rows, c)
    return int(rows.shape[1] - fix.max())


def group_min_distance(G) -> int:
    """``n`` minus the largest fixed-point count of a non-identity element."""
    rows = _rows_of(G)
    n = rows.shape[1]
    if rows.shape[0] < 2:
        return n
    fix = kernels.fixed_point_counts(rows, identity(n))
    fix = fix[fix < n]
    return int(n - fix.max())


# ---------------------------------------------------------------------------
# verification

def verify_pa(A, claimed_d: int, mode: str = "full", *, pairs: int = DEFAULT_SAMPLE_PAIRS,
              seed: Optional[int] = 0, group=None, reps=None, blocks=None) -> DistanceReport:
    """Check ``hd(A) >= claimed_d``; violations come back as a witness, never raise.

    ``mode`` is one of

    * ``"full"`` - every unordered pair, early exit at ``n - d + 1`` agreements;
    * ``"sampled"`` - ``pairs`` uniformly random distinct pairs drawn with ``seed``;
    * ``"coset"`` - ``A`` is the union of cosets ``G rep``; checks the
      group distance once plus every representative pair with the shortcut.
      ``blocks`` (a list of row-index arrays) may be given to additionally
      confirm that ``A`` really is that union.
    """
    A = as_pa(A)
    claimed_d = int(claimed_d)
    if mode == "full":
        rep = min_distance(A, early_exit_threshold=claimed_d)
        rep.mode = "full"
    elif mode == "sampled":
        rep = _verify_sampled(A, claimed_d, pairs, seed)
    elif mode == "coset":
        if group is None or reps is None:
            raise ValueError("coset mode needs group and reps")
        rep = verify_cosets(group, reps, claimed_d)
    else:
        raise ValueError(f"unknown verification mode {mode!r}")
    A.certify(rep)
    return rep


def sample_pairs(N: int, pairs: int, seed):
    """Uniform random unordered pairs ``i < j`` of ``range(N)``."""
    rng = np.random.default_rng(seed)
    ii = rng.integers(0, N, size=pairs)
    jj = rng.integers(0, N - 1, size=pairs)
    jj = jj + (jj >= ii)
    lo = np.minimum(ii, jj)
    hi = np.maximum(ii, jj)
    return lo, hi


def _verify_sampled(A, claimed_d, pairs, seed):
    N, n = len(A), A.n
    if N < 2:
        return DistanceReport("sampled", n, 0, None, seed, claimed_d, True, exact=False)
    ii, jj = sample_pairs(N, int(pairs), seed)
    dist = kernels.pair_distances(A.rows, ii, jj)
    k = int(dist.argmin())
    bad = np.flatnonzero(dist < claimed_d)
    witness = (int(ii[k]), int(jj[k]))
    if bad.size:
        # report the lexicographically smallest violating sampled pair
        order = np.lexsort((jj[bad], ii[bad]))
        b = bad[order[0]]
        witness = (int(ii[b]), int(jj[b]))
        found = int(dist[b])
    else:
        found = int(dist[k])
    return DistanceReport("sampled", found, int(pairs), witness, seed, claimed_d,
                          passed=not bad.size, exact=False,
                          details={"violations": int(bad.size)})


def verify_cosets(G, reps, claimed_d: int) -> DistanceReport:
    """Distance check for a union of cosets ``G r`` (``r`` in ``reps``).

    Inside one coset the distance equals the group's distance; across two
    cosets the shortcut applies.  The reported witness is a pair of
    representative indices (``(i, i)`` for the intra-coset case).
    """
    rows = _rows_of(G)
    n = rows.shape[1]
    best = group_min_distance(rows)
    witness = (0, 0)
    checked = 1
    per_pair = {}
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            d = coset_min_distance(rows, reps[i], reps[j])
            per_pair[(i, j)] = d
            checked += 1
            if d < best:
                best, witness = d, (i, j)
    return DistanceReport("coset-shortcut", best, checked, witness, None, claimed_d,
                          passed=best >= claimed_d,
                          details={"group_distance": group_min_distance(rows),
                                   "pair_distances": {f"{i},{j}": d for (i, j), d in per_pair.items()},
                                   "n": n})
