"""Partition systems and the extension operators built on them.

A partition system bundles blocks of permutations on ``Z_n`` with aligned
position sets ``P`` and symbol sets ``Q`` (plus ``R``, ``S`` for the
two-symbol variant).  A block whose entry is ``None`` (or the marker set
``{n}``) is *append-only*: its rows keep every symbol and simply receive the
new symbol(s) at the end.  Markers may sit at any index, so block order is
preserved exactly as given.

Extension of ``sigma`` by position ``p`` puts the new symbol ``n`` at ``p`` and
moves the displaced ``sigma(p)`` to the new last position.  Only *covered*
rows (some ``p`` in ``P_i`` with ``sigma(p)`` in ``Q_i``) survive; the
designated ``p`` is the smallest such position.
"""

import json
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .perm import (
    PermutationArray,
    as_pa,
    coset_min_distance,
    cross_report,
    group_min_distance,
    min_distance,
    _verify_sampled,
)

FULL_CHECK_ROWS = 20_000


class PartitionSystemError(ValueError):
    """Malformed or invalid partition system."""


def _norm_set(s, n):
    if s is None:
        return None
    s = sorted(int(x) for x in s)
    if s == [n]:
        return None
    return s


def _align(blocks, sets, n, what, n_append):
    """Return one entry per block, ``None`` marking append-only blocks."""
    if sets is None:
        raise PartitionSystemError(f"{what} missing")
    sets = list(sets)
    if len(sets) == len(blocks) - n_append:
        # short form: trailing blocks are the append-only ones
        sets = sets + [None] * n_append
    if len(sets) != len(blocks):
        raise PartitionSystemError(f"{what} has {len(sets)} entries for {len(blocks)} blocks")
    return [_norm_set(s, n) for s in sets]


@dataclass
class PartitionSystem:
    """Distance-``d`` partition system; see the module docstring for markers."""

    blocks: List[PermutationArray]
    P: list
    Q: list
    d: int
    n: Optional[int] = None
    coset_info: Optional[dict] = None  # {"group": rows, "reps": [...]} when blocks are cosets

    n_append = 1
    cross_slack = 1

    def __post_init__(self):
        self.blocks = [as_pa(b) for b in self.blocks]
        if self.n is None:
            if not self.blocks:
                raise PartitionSystemError("cannot infer n from an empty system")
            self.n = self.blocks[0].n
        self.P = _align(self.blocks, self.P, self.n, "P", self.n_append)
        self.Q = _align(self.blocks, self.Q, self.n, "Q", self.n_append)
        for i, (p, q) in enumerate(zip(self.P, self.Q)):
            if (p is None) != (q is None):
                raise PartitionSystemError(f"block {i}: P and Q disagree on the append marker")

    @property
    def append_indices(self):
        return [i for i, p in enumerate(self.P) if p is None]

    @property
    def consuming_indices(self):
        return [i for i, p in enumerate(self.P) if p is not None]

    @property
    def s(self):
        return len(self.consuming_indices)


@dataclass
class PartitionSystem2(PartitionSystem):
    """``(d, 2)`` system: two append-only blocks and extra sets ``R``, ``S``."""

    R: list = None
    S: list = None

    n_append = 2
    cross_slack = 2

    def __post_init__(self):
        super().__post_init__()
        self.R = _align(self.blocks, self.R, self.n, "R", self.n_append)
        self.S = _align(self.blocks, self.S, self.n, "S", self.n_append)


@dataclass
class ValidationReport:
    valid: bool
    violation: Optional[str] = None
    checks: dict = field(default_factory=dict)

    def __bool__(self):
        return self.valid


@dataclass
class CoverageReport:
    counts: List[int]
    designated: List[np.ndarray]  # per block: position (or (p, r) pairs), -1 when uncovered
    covered_mask: List[np.ndarray]
    uncovered: List[np.ndarray]

    @property
    def total(self):
        return int(sum(self.counts))


# ---------------------------------------------------------------------------
# validation

def _is_partition(sets, n):
    flat = [x for s in sets for x in s]
    return len(flat) == len(set(flat)) and set(flat) == set(range(n))


def validate(system: PartitionSystem, full_threshold: int = FULL_CHECK_ROWS,
             check_distances: bool = True) -> ValidationReport:
    """Partition-ness, disjointness, Properties I and II; first failure wins.

    Distances are checked exactly when the whole system has at most
    ``full_threshold`` rows, through the coset shortcut when
    ``system.coset_info`` is given, and by sampling otherwise (recorded as
    ``certified=False`` in ``checks``).
    """
    n, d = system.n, system.d
    checks = {"n": n, "d": d, "certified": True}
    is2 = isinstance(system, PartitionSystem2)
    n_app = len(system.append_indices)
    if (is2 and n_app != 2) or (not is2 and n_app > 1):
        return ValidationReport(False, f"expected {'exactly 2' if is2 else 'at most 1'} append-only blocks, found {n_app}", checks)
    for b in system.blocks:
        if b.n != n:
            return ValidationReport(False, "blocks act on different n", checks)
    cons = system.consuming_indices
    families = [("P", system.P), ("Q", system.Q)]
    if is2:
        families += [("R", system.R), ("S", system.S)]
    for name, sets in families:
        live = [sets[i] for i in cons]
        if cons and not _is_partition(live, n):
            return ValidationReport(False, f"{name} is not a partition of Z_{n}", checks)
    if is2:
        for i in cons:
            if set(system.P[i]) & set(system.R[i]):
                return ValidationReport(False, f"P_{i} and R_{i} intersect", checks)
            if set(system.Q[i]) & set(system.S[i]):
                return ValidationReport(False, f"Q_{i} and S_{i} intersect", checks)

    seen = {}
    for bi, b in enumerate(system.blocks):
        for r in b.rows:
            key = r.tobytes()
            if key in seen and seen[key] != bi:
                return ValidationReport(False, f"blocks {seen[key]} and {bi} share a row", checks)
            seen[key] = bi
    if not check_distances:
        return ValidationReport(True, None, checks)

    total = sum(len(b) for b in system.blocks)
    slack = system.cross_slack
    info = system.coset_info
    if total <= full_threshold:
        checks["distance_mode"] = "full"
        for i, b in enumerate(system.blocks):
            if len(b) == 0:
                continue
            rep = min_distance(b, early_exit_threshold=d)
            if not rep.passed:
                return ValidationReport(False, f"intra-block distance fails for block {i}: distance {rep.min_distance_found} < {d}", checks)
        nb = len(system.blocks)
        for i in range(nb):
            for j in range(i + 1, nb):
                if len(system.blocks[i]) == 0 or len(system.blocks[j]) == 0:
                    continue
                rep = cross_report(system.blocks[i], system.blocks[j], d - slack)
                if not rep.passed:
                    return ValidationReport(False, f"cross-block distance fails for blocks {i},{j}: distance {rep.min_distance_found} < {d - slack}", checks)
    elif info is not None:
        checks["distance_mode"] = "coset-shortcut"
        G, reps = np.asarray(info["group"]), info["reps"]
        gd = group_min_distance(G)
        checks["group_distance"] = gd
        if gd < d:
            return ValidationReport(False, f"intra-block distance fails: group distance {gd} < {d}", checks)
        pair = {}
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                cd = coset_min_distance(G, reps[i], reps[j])
                pair[f"{i},{j}"] = cd
                if cd < d - slack:
                    checks["pair_distances"] = pair
                    return ValidationReport(False, f"cross-block distance fails for blocks {i},{j}: distance {cd} < {d - slack}", checks)
        checks["pair_distances"] = pair
    else:
        checks["distance_mode"] = "sampled"
        checks["certified"] = False
        for i, b in enumerate(system.blocks):
            rep = _verify_sampled(b, d, 10**5, i)
            if not rep.passed:
                return ValidationReport(False, f"intra-block distance fails for block {i} (sampled)", checks)
    return ValidationReport(True, None, checks)


# ---------------------------------------------------------------------------
# coverage

def _mask(symbols, size):
    m = np.zeros(size, bool)
    if symbols:
        m[list(symbols)] = True
    return m


def covered(block, P_i, Q_i):
    """Covered rows of one block and their designated (smallest) positions.

    Returns ``(mask, positions)``; ``positions[k] = -1`` for uncovered rows.
    """
    rows = as_pa(block).rows
    N, n = rows.shape
    pos = np.array(sorted(P_i or []), dtype=np.int64)
    if N == 0 or pos.size == 0 or not Q_i:
        return np.zeros(N, bool), np.full(N, -1, np.int64)
    hits = _mask(Q_i, max(n, max(Q_i) + 1))[rows[:, pos]]
    mask = hits.any(axis=1)
    desig = np.where(mask, pos[hits.argmax(axis=1)], -1)
    return mask, desig


def covered2(block, P_i, Q_i, R_i, S_i):
    """2-covered rows; designated pair is the lexicographically smallest ``(p, r)``."""
    m1, p = covered(block, P_i, Q_i)
    m2, r = covered(block, R_i, S_i)
    mask = m1 & m2
    return mask, np.where(mask, p, -1), np.where(mask, r, -1)


def coverage(system: PartitionSystem) -> CoverageReport:
    counts, desig, masks, unc = [], [], [], []
    is2 = isinstance(system, PartitionSystem2)
    for i, b in enumerate(system.blocks):
        if system.P[i] is None:
            m = np.ones(len(b), bool)
            dsg = np.full(len(b), -1, np.int64)
        elif is2:
            m, p, r = covered2(b, system.P[i], system.Q[i], system.R[i], system.S[i])
            dsg = np.stack([p, r], axis=1)
        else:
            m, dsg = covered(b, system.P[i], system.Q[i])
        counts.append(int(m.sum()))
        desig.append(dsg)
        masks.append(m)
        unc.append(np.flatnonzero(~m))
    return CoverageReport(counts, desig, masks, unc)


# ---------------------------------------------------------------------------
# extension operators

def extend_rows(rows, positions, n):
    """``ext_p`` applied row-wise: ``sigma'(p) = n``, ``sigma'(n) = sigma(p)``."""
    rows = np.asarray(rows, dtype=np.int64)
    k = np.arange(rows.shape[0])
    out = np.empty((rows.shape[0], n + 1), dtype=np.int64)
    out[:, :n] = rows
    out[:, n] = rows[k, positions]
    out[k, positions] = n
    return out


def unextend_rows(rows, positions):
    """Inverse of :func:`extend_rows` given the designated positions."""
    rows = np.asarray(rows, dtype=np.int64)
    n = rows.shape[1] - 1
    k = np.arange(rows.shape[0])
    out = rows[:, :n].copy()
    out[k, positions] = rows[:, n]
    return out


def append_symbols(rows, tail):
    rows = np.asarray(rows, dtype=np.int64)
    t = np.broadcast_to(np.asarray(tail, dtype=np.int64), (rows.shape[0], len(tail)))
    return np.concatenate([rows, t], axis=1)


def _check_valid(system, validate_first):
    if validate_first:
        rep = validate(system)
        if not rep.valid:
            raise PartitionSystemError(f"invalid partition system: {rep.violation}")


def simple_extend(system: PartitionSystem, validate_first: bool = True) -> PermutationArray:
    """Apply simple extension; result acts on ``Z_{n+1}`` with distance >= d.

    Output rows keep block order and source row order.  ``meta["sizes"]``
    lists ``|ext(M_i)|`` per block.
    """
    if isinstance(system, PartitionSystem2):
        raise PartitionSystemError("use parallel_2ext for (d,2) systems")
    _check_valid(system, validate_first)
    n = system.n
    parts, sizes = [], []
    for i, b in enumerate(system.blocks):
        if system.P[i] is None:
            part = append_symbols(b.rows, [n])
        else:
            mask, pos = covered(b, system.P[i], system.Q[i])
            part = extend_rows(b.rows[mask], pos[mask], n)
        parts.append(part)
        sizes.append(part.shape[0])
    rows = np.concatenate(parts) if parts else np.empty((0, n + 1), np.int64)
    return PermutationArray(rows, n + 1, meta={"construction": "simple", "d": system.d, "sizes": sizes})


def sequential_extend(systems: List[PartitionSystem], outer_P, outer_Q, d: Optional[int] = None,
                      validate_first: bool = True) -> PermutationArray:
    """Two-stage extension: extend each system, then extend the union again.

    ``outer_P``/``outer_Q`` are aligned with ``systems`` (markers allowed)
    and must form a valid distance-``d`` system on ``Z_{n+1}``; they are
    never invented here.
    """
    if not systems:
        raise PartitionSystemError("no systems given")
    d = systems[0].d if d is None else d
    stage1 = [simple_extend(s, validate_first=validate_first) for s in systems]
    psi = PartitionSystem(stage1, outer_P, outer_Q, d, n=systems[0].n + 1)
    if validate_first:
        rep = validate(psi)
        if not rep.valid:
            raise PartitionSystemError(f"stage-2 system invalid: {rep.violation}")
    out = simple_extend(psi, validate_first=False)
    out.meta.update({"construction": "sequential",
                     "stage1_sizes": [len(a) for a in stage1],
                     "stage2_sizes": out.meta.pop("sizes")})
    return out


def shift_sequence(n: int, r: int, t: int) -> np.ndarray:
    """Left cyclic shift by ``t`` of ``(n, n+1, ..., n+r-1)``."""
    return np.roll(np.arange(n, n + r), -(t % r))


def parallel_rudimentary(blocks, r: int, d: int, check: bool = True) -> PermutationArray:
    """Rudimentary parallel extension of ``2r`` blocks onto ``Z_{n+r}``."""
    blocks = [as_pa(b) for b in blocks]
    if len(blocks) != 2 * r:
        raise PartitionSystemError(f"need exactly {2 * r} blocks, got {len(blocks)}")
    n = blocks[0].n
    if r > n:
        raise PartitionSystemError("r exceeds n")
    if check:
        for i, b in enumerate(blocks):
            if len(b) > 1 and not min_distance(b, early_exit_threshold=d).passed:
                raise PartitionSystemError(f"block {i} has distance below {d}")
        union = PermutationArray.concat(blocks, n)
        if len(union) > 1 and not min_distance(union, early_exit_threshold=d - r).passed:
            raise PartitionSystemError(f"union distance below {d - r}")
    parts = []
    for i, b in enumerate(blocks):
        rows = b.rows.astype(np.int64)
        gamma = shift_sequence(n, r, i)
        if i < r:
            head = np.broadcast_to(gamma, (rows.shape[0], r))
            part = np.concatenate([head, rows[:, r:], rows[:, :r]], axis=1)
        else:
            part = append_symbols(rows, gamma)
        parts.append(part)
    return PermutationArray(np.concatenate(parts), n + r,
                            meta={"construction": "parallel-r", "r": r, "d": d,
                                  "sizes": [len(b) for b in blocks]})


def parallel_2ext(system: PartitionSystem2, validate_first: bool = True) -> PermutationArray:
    """Two new symbols at once; result on ``Z_{n+2}`` with distance >= d.

    The first append-only block gets ``(n, n+1)`` and the second ``(n+1, n)``.
    """
    _check_valid(system, validate_first)
    n = system.n
    app = system.append_indices
    if len(app) != 2:
        raise PartitionSystemError("a (d,2) system needs exactly two append-only blocks")
    tails = {app[0]: [n, n + 1], app[1]: [n + 1, n]}
    parts, sizes = [], []
    for i, b in enumerate(system.blocks):
        if i in tails:
            part = append_symbols(b.rows, tails[i])
        else:
            mask, p, r = covered2(b, system.P[i], system.Q[i], system.R[i], system.S[i])
            rows = b.rows[mask].astype(np.int64)
            p, r = p[mask], r[mask]
            k = np.arange(rows.shape[0])
            part = np.empty((rows.shape[0], n + 2), np.int64)
            part[:, :n] = rows
            part[:, n] = rows[k, p]
            part[:, n + 1] = rows[k, r]
            part[k, p] = n
            part[k, r] = n + 1
        parts.append(part)
        sizes.append(part.shape[0])
    rows = np.concatenate(parts)
    # rows are distinct by construction (extension is invertible per block,
    # tails differ between blocks), so skip the O(N log N) duplicate scan
    return PermutationArray(rows, n + 2, validate=False,
                            meta={"construction": "parallel-2", "d": system.d, "sizes": sizes})


def rotate(sets, k: int = 1):
    """Cyclic shift of a list of sets: entry ``i`` becomes ``sets[i + k]``."""
    sets = list(sets)
    k %= max(len(sets), 1)
    return sets[k:] + sets[:k]


# ---------------------------------------------------------------------------
# descriptor files

def _load_block(spec, base_dir, cache):
    from .groups import cyclic_coset_decomposition, make_group
    from .ledger import read_pa

    if "rows" in spec:
        return PermutationArray(spec["rows"])
    if "file" in spec:
        return read_pa(os.path.join(base_dir, spec["file"]))
    if "group" in spec:
        g = spec["group"]
        key = (g["family"].lower(), int(g["q"]), g.get("labeling", "natural"))
        if key not in cache:
            cache[key] = make_group(g["family"], int(g["q"]), g.get("labeling", "natural"))
        G = cache[key]
        if "cyclic_coset" in spec:
            a = int(spec["cyclic_coset"])
            blocks = cyclic_coset_decomposition(G)
            return next(b for b in blocks if b.meta["a"] == a)
        rep = spec.get("rep", "identity")
        if rep == "identity":
            return G.base
        return PermutationArray(G.rows[:, np.asarray(rep)], G.n, validate=False)
    raise PartitionSystemError(f"unrecognised block spec {spec!r}")


def _coset_info(specs, blocks):
    groups = {json.dumps(s.get("group"), sort_keys=True) for s in specs}
    if len(groups) != 1 or None in [s.get("group") for s in specs]:
        return None
    if any("cyclic_coset" in s for s in specs):
        return None
    n = blocks[0].n
    reps = [np.arange(n) if s.get("rep", "identity") == "identity" else np.asarray(s["rep"]) for s in specs]
    ident = next(i for i, s in enumerate(specs) if s.get("rep", "identity") == "identity") \
        if any(s.get("rep", "identity") == "identity" for s in specs) else None
    if ident is None:
        return None
    return {"group": blocks[ident].rows, "reps": reps}


def system_from_dict(desc: dict, base_dir: str = ".", cache=None):
    """Build a :class:`PartitionSystem` or :class:`PartitionSystem2` from a descriptor."""
    cache = {} if cache is None else cache
    specs = desc["blocks"]
    blocks = [_load_block(b, base_dir, cache) for b in specs]
    d = int(desc["d"])
    n = int(desc.get("n", blocks[0].n))
    info = _coset_info(specs, blocks)
    if "R" in desc or "S" in desc:
        return PartitionSystem2(blocks, desc["P"], desc["Q"], d, n, info, R=desc["R"], S=desc["S"])
    return PartitionSystem(blocks, desc["P"], desc["Q"], d, n, info)


def load_descriptor(path):
    with open(path) as fh:
        return json.load(fh)


def run_descriptor(desc: dict, base_dir: str = ".", validate_first: bool = True) -> PermutationArray:
    """Execute the extension a descriptor asks for (``mode`` key)."""
    mode = desc.get("mode", "simple")
    cache = {}
    if mode == "simple":
        return simple_extend(system_from_dict(desc, base_dir, cache), validate_first)
    if mode == "sequential":
        systems = [system_from_dict({**s, "d": desc["d"]}, base_dir, cache) for s in desc["stage1"]]
        outer = desc["stage2"]
        return sequential_extend(systems, outer["P"], outer["Q"], int(desc["d"]), validate_first)
    if mode == "parallel-r":
        blocks = [_load_block(b, base_dir, cache) for b in desc["blocks"]]
        return parallel_rudimentary(blocks, int(desc["r"]), int(desc["d"]), check=validate_first)
    if mode == "parallel-2":
        return parallel_2ext(system_from_dict(desc, base_dir, cache), validate_first)
    raise PartitionSystemError(f"unknown mode {mode!r}")
