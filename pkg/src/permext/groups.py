"""AGL(1,q), PGL(2,q) and PGammaL(2,q) as permutation arrays, plus block splits.

Row order is deterministic so that partition files can refer to row indices.

* ``agl1(q)``: maps ``x -> a x + b``, ``a`` ascending over the nonzero element
  encodings, then ``b`` ascending.
* ``pgl2(q)``: Moebius maps ``x -> (a x + b)/(c x + d)`` on ``GF(q) + {inf}``
  with normalised matrices (first nonzero entry 1) listed in lexicographic
  ``(a, b, c, d)`` order.
* ``pgammal2(q)``: ``g o phi_j`` for the Frobenius powers ``phi_j``, ``j``-major.

Two point labellings are offered for the projective line.  ``"natural"``
puts field element ``x`` at position ``x`` and infinity at ``q``.  ``"log"``
puts infinity at 0, zero at 1 and ``w^i`` at ``i + 2`` (``w`` the smallest
primitive element); this is the labelling under which published coset
representatives for PGL(2,37) reproduce their stated distances.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .field import make_field, frobenius_map
from .perm import PermutationArray, SYMBOL_DTYPE, identity, inverse

FAMILIES = ("AGL1", "PGL2", "PGammaL2", "cyclic-subgroup", "explicit")


class GroupError(ValueError):
    pass


@dataclass
class GroupPA:
    base: PermutationArray
    family: str
    q: Optional[int] = None
    labels: Optional[list] = None
    labeling: str = "natural"
    _index: dict = field(default=None, repr=False, compare=False)

    @property
    def rows(self):
        return self.base.rows

    @property
    def n(self):
        return self.base.n

    def __len__(self):
        return len(self.base)

    def index(self) -> dict:
        """Row bytes -> row index, built lazily."""
        if self._index is None:
            self._index = {r.tobytes(): i for i, r in enumerate(self.rows)}
        return self._index

    def find(self, perm) -> int:
        """Row index of ``perm`` or -1."""
        key = np.asarray(perm, dtype=SYMBOL_DTYPE).tobytes()
        return self.index().get(key, -1)

    def __contains__(self, perm):
        return self.find(perm) >= 0

    def header(self):
        return {"family": self.family, "q": self.q, "labeling": self.labeling}


def relabel_rows(rows, lab):
    """Conjugate every row by the point relabelling ``lab`` (old -> new)."""
    rows = np.asarray(rows)
    lab = np.asarray(lab)
    return lab[rows][:, inverse(lab)]


def explicit_group(rows, name="explicit"):
    return GroupPA(PermutationArray(rows), "explicit", None, None)


# ---------------------------------------------------------------------------
# AGL(1, q)

def agl1(q: int) -> GroupPA:
    F = make_field(q)
    x = np.arange(q)
    a = np.repeat(np.arange(1, q), q)
    b = np.tile(np.arange(q), q - 1)
    rows = F.add_table[F.mul_table[a[:, None], x[None, :]], b[:, None]]
    labels = list(zip(a.tolist(), b.tolist()))
    pa = PermutationArray(rows, q, meta={"family": "AGL1", "q": q}, validate=False)
    return GroupPA(pa, "AGL1", q, labels)


def cyclic_coset_decomposition(G: GroupPA) -> List[PermutationArray]:
    """The ``q-1`` translation cosets ``C_a = {a x + b : b}`` of AGL(1,q)."""
    if G.family != "AGL1":
        raise GroupError(f"cyclic decomposition needs an AGL1 group, got {G.family}")
    q = G.q
    blocks = []
    for t in range(q - 1):
        a = G.labels[t * q][0]
        blocks.append(PermutationArray(G.rows[t * q:(t + 1) * q], q,
                                       meta={"family": "cyclic-coset", "q": q, "a": a},
                                       validate=False))
    return blocks


def translation_subgroup(q: int) -> GroupPA:
    G = agl1(q)
    rows = G.rows[:q]
    return GroupPA(PermutationArray(rows, q, validate=False), "cyclic-subgroup", q, G.labels[:q])


# ---------------------------------------------------------------------------
# PGL(2, q) and PGammaL(2, q)

def _pgl_params(q):
    """Normalised (a, b, c, d) with ad - bc != 0, lexicographic."""
    F = make_field(q)
    e = np.arange(q)
    # a = 0, b = 1: det = -c, so c != 0
    c0, d0 = np.meshgrid(np.arange(1, q), e, indexing="ij")
    part0 = np.stack([np.zeros(c0.size, int), np.ones(c0.size, int), c0.ravel(), d0.ravel()], 1)
    # a = 1: det = d - b c != 0
    b1, c1, d1 = np.meshgrid(e, e, e, indexing="ij")
    b1, c1, d1 = b1.ravel(), c1.ravel(), d1.ravel()
    ok = d1 != F.mul_table[b1, c1]
    part1 = np.stack([np.ones(ok.sum(), int), b1[ok], c1[ok], d1[ok]], 1)
    return np.concatenate([part0, part1]).astype(np.int64)


def _moebius_rows(q, params):
    F = make_field(q)
    a, b, c, d = (params[:, i:i + 1] for i in range(4))
    x = np.arange(q)[None, :]
    num = F.add_table[F.mul_table[a, x], b]
    den = F.add_table[F.mul_table[c, x], d]
    img = np.where(den == 0, q, F.mul_table[num, F.inv_table[den]])
    inf_img = np.where(c[:, 0] == 0, q, F.mul_table[a[:, 0], F.inv_table[c[:, 0]]])
    return np.concatenate([img, inf_img[:, None]], axis=1)


def projective_labels(q: int, labeling: str = "natural") -> np.ndarray:
    """Map natural point ids (field element, ``q`` = infinity) to array positions."""
    if labeling == "natural":
        return np.arange(q + 1)
    if labeling == "log":
        F = make_field(q)
        lab = np.empty(q + 1, dtype=np.int64)
        lab[q] = 0
        lab[0] = 1
        lab[1:q] = F.log_table[1:q] + 2
        return lab
    raise GroupError(f"unknown labeling {labeling!r}")


def pgl2(q: int, labeling: str = "natural") -> GroupPA:
    params = _pgl_params(q)
    rows = _moebius_rows(q, params)
    if labeling != "natural":
        rows = relabel_rows(rows, projective_labels(q, labeling))
    pa = PermutationArray(rows, q + 1, meta={"family": "PGL2", "q": q, "labeling": labeling},
                          validate=False)
    return GroupPA(pa, "PGL2", q, [tuple(p) for p in params.tolist()], labeling)


def pgammal2(q: int, labeling: str = "natural") -> GroupPA:
    F = make_field(q)
    params = _pgl_params(q)
    base = _moebius_rows(q, params)
    blocks, labels = [], []
    for j in range(F.k):
        phi = np.append(frobenius_map(F, j), q)  # infinity is fixed
        blocks.append(base[:, phi])
        labels.extend(tuple(p) + (j,) for p in params.tolist())
    rows = np.concatenate(blocks)
    if labeling != "natural":
        rows = relabel_rows(rows, projective_labels(q, labeling))
    pa = PermutationArray(rows, q + 1, meta={"family": "PGammaL2", "q": q, "labeling": labeling},
                          validate=False)
    return GroupPA(pa, "PGammaL2", q, labels, labeling)


def make_group(family: str, q: int, labeling: str = "natural") -> GroupPA:
    fam = family.lower()
    if fam == "agl1":
        return agl1(q)
    if fam == "pgl2":
        return pgl2(q, labeling)
    if fam in ("pgammal2", "pgaml2", "pgammal"):
        return pgammal2(q, labeling)
    raise GroupError(f"unknown family {family!r}")


def group_order_formula(family: str, q: int) -> int:
    if family == "AGL1":
        return q * (q - 1)
    if family == "PGL2":
        return (q + 1) * q * (q - 1)
    if family == "PGammaL2":
        from .field import prime_power
        return prime_power(q)[1] * (q + 1) * q * (q - 1)
    raise GroupError(family)


# ---------------------------------------------------------------------------
# structural checks

def closure_check(G: GroupPA, samples: int = 10_000, seed: int = 0) -> bool:
    """Random products ``f o g`` must be rows of ``G``; identity must be present."""
    rows = G.rows.astype(np.int64)
    N, n = rows.shape
    if G.find(identity(n)) < 0:
        return False
    rng = np.random.default_rng(seed)
    fi = rng.integers(0, N, samples)
    gi = rng.integers(0, N, samples)
    idx = G.index()
    prods = np.take_along_axis(rows[fi], rows[gi], axis=1).astype(SYMBOL_DTYPE)
    for r in prods:
        if r.tobytes() not in idx:
            return False
    inv_probe = rows[fi[: min(samples, 256)]]
    for r in inv_probe:
        if G.find(inverse(r)) < 0:
            return False
    return True


def element_order(perm) -> int:
    perm = np.asarray(perm, dtype=np.int64)
    seen = np.zeros(perm.shape[0], bool)
    order = 1
    for s in range(perm.shape[0]):
        if seen[s]:
            continue
        length, x = 0, s
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            length += 1
        order = order * length // np.gcd(order, length)
    return int(order)


def _regular_cyclic_subgroup(G: GroupPA):
    """Powers of a fixed-point-free element of order ``n`` (a Singer cycle for PGL2)."""
    n = G.n
    rows = G.rows.astype(np.int64)
    fixed = (rows == np.arange(n)).sum(axis=1)
    for i in np.flatnonzero(fixed == 0):
        g = rows[i]
        if element_order(g) == n:
            powers = [identity(n)]
            for _ in range(n - 1):
                powers.append(g[powers[-1]])
            return np.array(powers)
    return None


def greedy_clique_blocks(rows, n=None):
    """Greedy partition into blocks of pairwise distance ``n``.

    Scans rows in order; each row joins the first open block it disagrees
    with everywhere, or starts a new one.  Blocks are returned as index
    arrays; callers decide whether short blocks are acceptable.
    """
    rows = np.asarray(rows)
    n = rows.shape[1] if n is None else n
    blocks, used = [], []  # used[b]: (n, n) bool, symbol s already at position x
    for i, r in enumerate(rows):
        for b, mask in enumerate(used):
            if len(blocks[b]) < n and not mask[np.arange(n), r].any():
                blocks[b].append(i)
                mask[np.arange(n), r] = True
                break
        else:
            m = np.zeros((n, n), bool)
            m[np.arange(n), r] = True
            used.append(m)
            blocks.append([i])
    return [np.array(b) for b in blocks]


def block_decomposition(G: GroupPA, method: str = "auto") -> List[PermutationArray]:
    """Split ``G`` into blocks of ``n`` rows with pairwise distance ``n``.

    AGL1 uses its translation cosets.  PGL2 (and anything else) first tries
    the cosets ``g o C`` of a regular cyclic subgroup ``C``; when no such
    subgroup exists the greedy clique partition runs instead, and any block
    that comes out short raises :class:`GroupError`.
    """
    if G.family == "AGL1" and method in ("auto", "cyclic"):
        return cyclic_coset_decomposition(G)
    n = G.n
    rows = G.rows.astype(np.int64)
    C = _regular_cyclic_subgroup(G) if method in ("auto", "singer") else None
    out = []
    if C is not None:
        idx = G.index()
        assigned = np.zeros(len(G), bool)
        for i in range(len(G)):
            if assigned[i]:
                continue
            members = rows[i][C]  # g o c for c in C
            ids = [idx.get(m.astype(SYMBOL_DTYPE).tobytes(), -1) for m in members]
            if min(ids) < 0:
                raise GroupError("regular subgroup coset leaves the group")
            assigned[ids] = True
            out.append(PermutationArray(rows[ids], n, validate=False,
                                        meta={"block": len(out), "method": "singer"}))
        return out
    parts = greedy_clique_blocks(rows, n)
    short = [len(p) for p in parts if len(p) != n]
    if short:
        raise GroupError(f"greedy clique partition failed: {len(short)} blocks short of {n} rows")
    return [PermutationArray(rows[p], n, validate=False, meta={"block": k, "method": "greedy"})
            for k, p in enumerate(parts)]
