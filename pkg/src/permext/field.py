"""Table-driven arithmetic in GF(p^k) for q = p^k <= 1024.

Elements are encoded as integers ``0..q-1`` whose base-``p`` digits are the
polynomial coefficients (digit ``i`` is the coefficient of ``x^i``).  For a
prime field this is ordinary residue arithmetic.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple

import numpy as np

MAX_Q = 1024


class FieldError(ValueError):
    pass


def prime_power(q: int) -> Tuple[int, int]:
    """Return ``(p, k)`` with ``q = p**k``, or raise :class:`FieldError`."""
    q = int(q)
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, r = 0, q
    while r % p == 0:
        r //= p
        k += 1
    if r != 1:
        raise FieldError(f"{q} is not a prime power")
    return p, k


def is_prime_power(q: int) -> bool:
    try:
        prime_power(q)
        return True
    except FieldError:
        return False


# -- dense polynomials over GF(p), coefficient lists low degree first --------

def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _polymod(a, m, p):
    a = _trim(a)
    m = _trim(m)
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        f = (a[-1] * inv_lead) % p
        s = len(a) - len(m)
        for i, mc in enumerate(m):
            a[s + i] = (a[s + i] - f * mc) % p
        a = _trim(a)
    return a


def _monic_polys(deg, p):
    """All monic polynomials of exact degree ``deg``, ordered by lower-coefficient encoding."""
    for code in range(p**deg):
        low = [(code // p**i) % p for i in range(deg)]
        yield low + [1]


def is_irreducible(poly, p) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    poly = _trim(poly)
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for div in _monic_polys(d, p):
            if not _polymod(poly, div, p):
                return False
    return deg >= 1


def smallest_irreducible(p, k):
    """First monic irreducible of degree ``k`` in lower-coefficient order.

    Candidates ``x^k + c_{k-1} x^{k-1} + ... + c_0`` are ordered by the
    integer ``sum c_i p^i``; with ``k = 1`` this is just ``x``.
    """
    for poly in _monic_polys(k, p):
        if k == 1 or (poly[0] != 0 and is_irreducible(poly, p)):
            return poly
    raise FieldError(f"no irreducible polynomial of degree {k} over GF({p})")  # pragma: no cover


@dataclass(frozen=True)
class FieldTable:
    p: int
    k: int
    q: int
    modulus_poly: tuple
    add_table: np.ndarray = field(repr=False)
    mul_table: np.ndarray = field(repr=False)
    neg_table: np.ndarray = field(repr=False)
    inv_table: np.ndarray = field(repr=False)
    log_table: np.ndarray = field(repr=False)
    exp_table: np.ndarray = field(repr=False)
    generator: int = 0

    def add(self, a, b):
        return int(self.add_table[a, b])

    def sub(self, a, b):
        return int(self.add_table[a, self.neg_table[b]])

    def mul(self, a, b):
        return int(self.mul_table[a, b])

    def inv(self, a):
        return field_inv(self, a)

    def div(self, a, b):
        return int(self.mul_table[a, field_inv(self, b)])

    def power(self, a, e):
        if a == 0:
            return 0 if e > 0 else 1
        return int(self.exp_table[(int(self.log_table[a]) * e) % (self.q - 1)])

    def elements(self):
        return range(self.q)

    def digits(self, a):
        return [(a // self.p**i) % self.p for i in range(self.k)]


def _encode(digits, p):
    out = 0
    for i, d in enumerate(digits):
        out += int(d) * p**i
    return out


def _poly_mulmod_code(a, b, p, k, mod):
    da = [(a // p**i) % p for i in range(k)]
    db = [(b // p**i) % p for i in range(k)]
    prod = [0] * (2 * k - 1)
    for i, x in enumerate(da):
        if x:
            for j, y in enumerate(db):
                prod[i + j] = (prod[i + j] + x * y) % p
    r = _polymod(prod, mod, p) if k > 1 else [prod[0] % p]
    r = r + [0] * (k - len(r))
    return _encode(r, p)


@lru_cache(maxsize=None)
def make_field(q: int) -> FieldTable:
    p, k = prime_power(q)
    if q > MAX_Q:
        raise FieldError(f"q={q} exceeds {MAX_Q}")
    mod = smallest_irreducible(p, k)

    digits = np.array([[(a // p**i) % p for i in range(k)] for a in range(q)], dtype=np.int64)
    weights = p ** np.arange(k, dtype=np.int64)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    neg = ((-digits) % p) @ weights

    # smallest primitive element, then log/exp tables
    # (for k > 1 the constants 1..p-1 live in GF(p) and cannot generate)
    gen = 1
    for g in range(2 if k == 1 else p, q):
        x, order = g, 1
        while x != 1:
            x = _poly_mulmod_code(x, g, p, k, mod)
            order += 1
        if order == q - 1:
            gen = g
            break
    exp = np.zeros(2 * (q - 1), dtype=np.int64)
    log = np.full(q, -1, dtype=np.int64)
    x = 1
    for i in range(q - 1):
        exp[i] = x
        log[x] = i
        x = _poly_mulmod_code(x, gen, p, k, mod)
    exp[q - 1:] = exp[: q - 1]

    mul = np.zeros((q, q), dtype=np.int64)
    nz = np.arange(1, q)
    mul[1:, 1:] = exp[(log[nz][:, None] + log[nz][None, :]) % (q - 1)]
    inv = np.zeros(q, dtype=np.int64)
    inv[1:] = exp[(-log[nz]) % (q - 1)]

    tables = [add, mul, neg, inv, log, exp]
    for t in tables:
        t.setflags(write=False)
    return FieldTable(p, k, q, tuple(mod), add, mul, neg, inv, log, exp, int(gen))


def field_inv(F: FieldTable, a: int) -> int:
    if a % F.q == 0:
        raise ZeroDivisionError("0 has no inverse")
    return int(F.inv_table[a])


def frobenius(F: FieldTable, a, j: int):
    """``a ** (p ** j)``; works on scalars and integer arrays."""
    if not 0 <= j < F.k:
        raise FieldError(f"frobenius exponent must lie in [0, {F.k})")
    e = F.p**j
    arr = np.asarray(a, dtype=np.int64)
    out = np.where(arr == 0, 0, F.exp_table[(F.log_table[arr] * e) % (F.q - 1)])
    return int(out) if out.ndim == 0 else out


def frobenius_map(F: FieldTable, j: int) -> np.ndarray:
    return frobenius(F, np.arange(F.q), j)
