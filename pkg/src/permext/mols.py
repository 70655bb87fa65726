"""Latin squares, MOLS over GF(q), and the modified Kronecker product.

The Kronecker product of PAs ``X`` (on ``l`` symbols) and ``Y`` (on ``m``)
replaces each symbol ``s`` of an ``X`` row by the shifted copy
``m*s + beta`` of a ``Y`` row, giving ``|X| |Y|`` rows on ``l m`` symbols.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from .extension import PartitionSystem, coverage, simple_extend
from .field import make_field
from .groups import agl1, cyclic_coset_decomposition
from .perm import PermutationArray, as_pa, min_distance


class LatinSquareError(ValueError):
    pass


@dataclass(frozen=True)
class LatinSquare:
    cells: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.cells, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise LatinSquareError("a Latin square must be m x m")
        m = c.shape[0]
        ref = np.arange(m)
        if not (np.sort(c, axis=1) == ref).all() or not (np.sort(c, axis=0) == ref[:, None]).all():
            raise LatinSquareError("every row and column must hold each symbol once")
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @property
    def order(self):
        return self.cells.shape[0]


def orthogonal(L1: LatinSquare, L2: LatinSquare) -> bool:
    m = L1.order
    pairs = L1.cells.ravel() * m + L2.cells.ravel()
    return np.unique(pairs).size == m * m


@dataclass
class MolsSet:
    order: int
    squares: List[LatinSquare]

    def __len__(self):
        return len(self.squares)

    def is_mutually_orthogonal(self) -> bool:
        for i in range(len(self.squares)):
            for j in range(i + 1, len(self.squares)):
                if not orthogonal(self.squares[i], self.squares[j]):
                    return False
        return True


def mols_prime_power(q: int) -> MolsSet:
    """``L_a[i][j] = a i + j`` for the ``q - 1`` nonzero ``a``."""
    F = make_field(q)
    i = np.arange(q)[:, None]
    j = np.arange(q)[None, :]
    squares = [LatinSquare(F.add_table[F.mul_table[a, i], j]) for a in range(1, q)]
    return MolsSet(q, squares)


def latin_to_pa(L: LatinSquare) -> PermutationArray:
    """Row ``k``, column ``j`` holds the ``i`` with ``L[i][j] = k``."""
    if not isinstance(L, LatinSquare):
        L = LatinSquare(L)
    return PermutationArray(np.argsort(L.cells, axis=0, kind="stable"), L.order)


def format_square(L: LatinSquare) -> str:
    return "\n".join(" ".join(str(int(v)) for v in row) for row in L.cells) + "\n"


def format_mols(S: MolsSet) -> str:
    return "".join(f"# square {k}\n" + format_square(L) for k, L in enumerate(S.squares))


def parse_mols(text: str) -> MolsSet:
    squares, cur = [], []
    for line in text.splitlines():
        if line.startswith("#"):
            if cur:
                squares.append(LatinSquare(cur))
                cur = []
            continue
        if line.strip():
            cur.append([int(t) for t in line.split()])
    if cur:
        squares.append(LatinSquare(cur))
    if not squares:
        raise LatinSquareError("no squares found")
    return MolsSet(squares[0].order, squares)


# ---------------------------------------------------------------------------
# Kronecker product

def kronecker(X, Y) -> PermutationArray:
    """Outer index runs over ``X`` rows, inner over ``Y`` rows."""
    X, Y = as_pa(X), as_pa(Y)
    l, m = X.n, Y.n
    xr = X.rows.astype(np.int64)
    yr = Y.rows.astype(np.int64)
    out = m * xr[:, None, :, None] + yr[None, :, None, :]
    return PermutationArray(out.reshape(len(X) * len(Y), l * m), l * m, validate=False)


def kron_blockwise(A_blocks, B_blocks, measure: bool = True):
    """Union of ``kronecker(A_i, B_i)``.

    Returns ``(array, info)`` where ``info`` carries the measured ``a``, ``b``
    (deficits of the input unions), the predicted ``l m - a b`` and, when
    ``measure`` is set, the measured minimum distance.
    """
    A_blocks = [as_pa(a) for a in A_blocks]
    B_blocks = [as_pa(b) for b in B_blocks]
    if len(A_blocks) != len(B_blocks):
        raise ValueError(f"block counts differ: {len(A_blocks)} vs {len(B_blocks)}")
    l, m = A_blocks[0].n, B_blocks[0].n
    parts = [kronecker(a, b) for a, b in zip(A_blocks, B_blocks)]
    out = PermutationArray.concat(parts, l * m, validate=False)
    info = {"l": l, "m": m, "k": len(A_blocks)}
    if measure:
        ua = PermutationArray.concat(A_blocks, l)
        ub = PermutationArray.concat(B_blocks, m)
        a = l - min_distance(ua).min_distance_found
        b = m - min_distance(ub).min_distance_found
        info.update(a=a, b=b, predicted=l * m - a * b,
                    measured=min_distance(out).min_distance_found)
        info["equality"] = info["measured"] == info["predicted"]
    return out, info


def lemma_partitions(k: int, l: int, m: int):
    """Position sets ``P_i`` and symbol sets ``Q_i`` on ``Z_{lm}``, ``i = 0..k-1``.

    ``P_i`` holds offset ``i`` inside each of the ``l`` width-``m`` column
    groups; ``Q_i`` is the ``i``-th run of ``m`` consecutive symbols.
    Positions and symbols left over go to the last set.
    """
    if k > m or k > l:
        raise ValueError(f"need k <= min(l, m); got k={k}, l={l}, m={m}")
    n = l * m
    P = [[i + j * m for j in range(l)] for i in range(k)]
    Q = [list(range(i * m, (i + 1) * m)) for i in range(k)]
    used_p = {x for s in P for x in s}
    used_q = {x for s in Q for x in s}
    P[-1] += [x for x in range(n) if x not in used_p]
    Q[-1] += [x for x in range(n) if x not in used_q]
    return P, Q


def kron_extend_bound(A_blocks, B_blocks, k: int = None, verify: bool = False):
    """Extend ``k`` Kronecker blocks by one symbol; returns ``(array, bound)``.

    Every one of the ``k l m`` rows is covered, so the bound is ``k n`` on
    ``n + 1`` symbols with distance ``n = l m``.  A coverage shortfall
    raises, since it means the input blocks are not what the construction
    needs.
    """
    A_blocks = [as_pa(a) for a in A_blocks]
    B_blocks = [as_pa(b) for b in B_blocks]
    k = min(len(A_blocks), len(B_blocks)) if k is None else k
    if k < 1:
        raise ValueError("need at least one block on each side")
    l, m = A_blocks[0].n, B_blocks[0].n
    n = l * m
    if verify:
        for blk, size in [(b, l) for b in A_blocks[:k]] + [(b, m) for b in B_blocks[:k]]:
            if min_distance(blk).min_distance_found != size:
                raise ValueError("input blocks must have full intra-block distance")
    blocks = [kronecker(A_blocks[i], B_blocks[i]) for i in range(k)]
    P, Q = lemma_partitions(k, l, m)
    system = PartitionSystem(blocks, P, Q, d=n, n=n)
    cov = coverage(system)
    expected = sum(len(b) for b in blocks)
    if cov.total != expected:
        raise ValueError(f"coverage shortfall: {cov.total} of {expected} rows covered")
    out = simple_extend(system, validate_first=False)
    out.meta.update({"construction": "kron-extend", "l": l, "m": m, "k": k, "d": n})
    return out, len(out)


def kron_agl_bound(p: int, q: int, verify: bool = False):
    """Prime-power route: cyclic blocks of AGL(1,p) and AGL(1,q)."""
    A = cyclic_coset_decomposition(agl1(p))
    B = cyclic_coset_decomposition(agl1(q))
    return kron_extend_bound(A, B, verify=verify)


def kron_mols_bound(n: int, m: int, mols_n: MolsSet, mols_m: MolsSet, verify: bool = False):
    """MOLS route: ``k = min(|mols_n|, |mols_m|)`` squares from each side."""
    k = min(len(mols_n), len(mols_m))
    if k < 1:
        raise ValueError("empty MOLS set")
    if mols_n.order != n or mols_m.order != m:
        raise ValueError("MOLS orders do not match n, m")
    A = [latin_to_pa(L) for L in mols_n.squares[:k]]
    B = [latin_to_pa(L) for L in mols_m.squares[:k]]
    return kron_extend_bound(A, B, k=k, verify=verify)
