import itertools

import numpy as np
import pytest

from permext.field import (FieldError, field_inv, frobenius, frobenius_map, is_irreducible,
                           is_prime_power, make_field, prime_power)

SMALL_Q = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 25, 27, 32, 49, 64]


def test_prime_field_is_mod_arithmetic():
    F = make_field(5)
    a, b = np.meshgrid(range(5), range(5), indexing="ij")
    assert np.array_equal(F.add_table, (a + b) % 5)
    assert np.array_equal(F.mul_table, (a * b) % 5)


def test_gf4():
    F = make_field(4)
    assert tuple(F.modulus_poly) == (1, 1, 1)
    assert F.mul(2, 2) == 3
    assert [frobenius(F, a, 1) for a in range(4)] == [0, 1, 3, 2]


def test_bad_q():
    for q in (6, 1, 12, 1025):
        with pytest.raises(FieldError):
            make_field(q)
    assert prime_power(81) == (3, 4)
    assert not is_prime_power(100)


def test_inverses():
    assert field_inv(make_field(7), 3) == 5
    assert field_inv(make_field(11), 1) == 1
    F = make_field(4)
    assert all(F.mul(a, field_inv(F, a)) == 1 for a in range(1, 4))
    with pytest.raises(ZeroDivisionError):
        field_inv(F, 0)


@pytest.mark.parametrize("q", SMALL_Q)
def test_field_axioms_exhaustive(q):
    F = make_field(q)
    p, k = prime_power(q)
    assert is_irreducible(F.modulus_poly, p)
    A, M = F.add_table, F.mul_table
    e = np.arange(q)
    assert np.array_equal(A, A.T) and np.array_equal(M, M.T)
    assert np.array_equal(A[0], e) and np.array_equal(M[1], e)
    assert all(sorted(A[a]) == list(e) for a in range(q))
    assert all(sorted(M[a, 1:]) == list(range(1, q)) for a in range(1, q))
    # associativity and distributivity over all triples
    x, y, z = np.meshgrid(e, e, e, indexing="ij")
    assert np.array_equal(A[A[x, y], z], A[x, A[y, z]])
    assert np.array_equal(M[M[x, y], z], M[x, M[y, z]])
    assert np.array_equal(M[x, A[y, z]], A[M[x, y], M[x, z]])
    # multiplicative group is cyclic, generated by F.generator
    powers = {F.power(F.generator, i) for i in range(q - 1)}
    assert powers == set(range(1, q))


@pytest.mark.parametrize("q", [128, 243, 343, 512, 1024])
def test_field_axioms_sampled(q):
    F = make_field(q)
    rng = np.random.default_rng(q)
    x, y, z = rng.integers(0, q, (3, 10**5))
    A, M = F.add_table, F.mul_table
    assert np.array_equal(M[x, A[y, z]], A[M[x, y], M[x, z]])
    assert np.array_equal(M[M[x, y], z], M[x, M[y, z]])


@pytest.mark.parametrize("q", [4, 8, 9, 27, 32])
def test_frobenius_is_automorphism(q):
    F = make_field(q)
    p, k = prime_power(q)
    e = np.arange(q)
    for j in range(k):
        phi = frobenius_map(F, j)
        x, y = np.meshgrid(e, e, indexing="ij")
        assert np.array_equal(phi[F.add_table[x, y]], F.add_table[phi[x], phi[y]])
        assert np.array_equal(phi[F.mul_table[x, y]], F.mul_table[phi[x], phi[y]])
    phi1 = frobenius_map(F, 1 % k)
    comp = e
    for _ in range(k):
        comp = phi1[comp]
    assert np.array_equal(comp, e)
    assert np.array_equal(frobenius_map(F, 0), e)


def test_modulus_is_smallest_irreducible():
    # brute-force the smallest monic irreducible of degree 2 over GF(3)
    F = make_field(9)
    for c0, c1 in itertools.product(range(3), repeat=2):
        cand = (c0, c1, 1)
        if is_irreducible(cand, 3):
            break
    assert tuple(F.modulus_poly) in {cand, cand[::-1]}
