import itertools

import numpy as np
import pytest

from kequiv.fields import IRREDUCIBLE, MAX_ORDER, FieldError, GF, factor_prime_power, field


def _poly_mod(a, b, p):
    """Remainder of a by monic b over GF(p), coefficient lists from the constant term."""
    a = list(a)
    k = len(b) - 1
    for d in range(len(a) - 1, k - 1, -1):
        c = a[d] % p
        if c:
            for i, m in enumerate(b):
                a[d - k + i] = (a[d - k + i] - c * m) % p
    return [x % p for x in a[:k]]


@pytest.mark.parametrize("pk", sorted(IRREDUCIBLE))
def test_shipped_polynomials_are_irreducible(pk):
    p, k = pk
    mod = IRREDUCIBLE[pk]
    assert len(mod) == k + 1 and mod[-1] == 1
    # brute force: no monic factor of degree 1..k//2
    for d in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            assert any(_poly_mod(mod, list(low) + [1], p)), f"{low} divides {mod}"


@pytest.mark.parametrize("q", [2, 3, 4, 5, 8, 9, 16, 25, 27, 49])
def test_field_axioms(q):
    F = field(q)
    a = np.arange(q)
    assert (F.add[0] == a).all() and (F.mul[1] == a).all()
    assert (F.add == F.add.T).all() and (F.mul == F.mul.T).all()
    assert (F.add[a, F.neg] == 0).all()
    assert (F.mul[a[1:], F.inv[1:]] == 1).all()
    for row in F.mul[1:]:
        assert sorted(row[1:]) == list(range(1, q))
    # associativity and distributivity on every triple
    x, y, z = np.meshgrid(a, a, a, indexing="ij")
    assert (F.mul[F.mul[x, y], z] == F.mul[x, F.mul[y, z]]).all()
    assert (F.add[F.add[x, y], z] == F.add[x, F.add[y, z]]).all()
    assert (F.mul[x, F.add[y, z]] == F.add[F.mul[x, y], F.mul[x, z]]).all()
    assert (F.sub[x, y] == F.add[x, F.neg[y]]).all()


def test_frobenius_fixes_prime_field():
    F = field(9)
    cube = F.mul[F.mul[np.arange(9), np.arange(9)], np.arange(9)]
    fixed = [a for a in range(9) if cube[a] == a]
    assert fixed == [0, 1, 2]
    assert F.embed_int(5) == 2


def test_prime_power_factoring():
    assert factor_prime_power(8) == (2, 3)
    assert factor_prime_power(125) == (5, 3)
    assert factor_prime_power(7) == (7, 1)
    for bad in (1, 6, 12, 100):
        with pytest.raises(FieldError):
            factor_prime_power(bad)


def test_limits():
    with pytest.raises(FieldError):
        GF(MAX_ORDER + 2)
    with pytest.raises(FieldError):
        GF(10)
    assert field(4) is field(4)
