"""Small finite fields GF(p^k) as integer-coded lookup tables.

An element is an integer ``0 <= a < q`` whose base-``p`` digits are the
coefficients of a polynomial in the generator, reduced modulo a shipped
irreducible polynomial.  Tables are numpy arrays so that jet and point
enumeration can index them in bulk.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_ORDER = 125

# monic irreducible polynomials, coefficients from the constant term upwards
IRREDUCIBLE: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 1, 0, 0, 1),
    (5, 2): (2, 0, 1),
    (5, 3): (1, 1, 0, 1),
    (7, 2): (1, 0, 1),
    (11, 2): (1, 0, 1),
}


class FieldError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def factor_prime_power(q: int) -> tuple[int, int]:
    for p in range(2, q + 1):
        if q % p == 0:
            if not _is_prime(p):
                continue
            k, r = 0, q
            while r % p == 0:
                r //= p
                k += 1
            if r != 1:
                raise FieldError(f"{q} is not a prime power")
            return p, k
    raise FieldError(f"{q} is not a prime power")


class GF:
    """Arithmetic tables for GF(q)."""

    def __init__(self, q: int):
        if q > MAX_ORDER:
            raise FieldError(f"GF({q}) exceeds the shipped table limit {MAX_ORDER}")
        p, k = factor_prime_power(q)
        self.q, self.p, self.k = q, p, k
        if k == 1:
            a = np.arange(q, dtype=np.int64)
            self.add = (a[:, None] + a[None, :]) % q
            self.mul = (a[:, None] * a[None, :]) % q
        else:
            if (p, k) not in IRREDUCIBLE:
                raise FieldError(f"no irreducible polynomial shipped for GF({p}^{k})")
            mod = IRREDUCIBLE[(p, k)]
            digits = [self._digits(a) for a in range(q)]
            self.add = np.zeros((q, q), dtype=np.int64)
            self.mul = np.zeros((q, q), dtype=np.int64)
            for a in range(q):
                for b in range(q):
                    self.add[a, b] = self._encode([(x + y) % p for x, y in zip(digits[a], digits[b])])
                    self.mul[a, b] = self._encode(_polymulmod(digits[a], digits[b], mod, p))
        self.neg = np.array([int(np.nonzero(self.add[a] == 0)[0][0]) for a in range(q)], dtype=np.int64)
        self.sub = self.add[:, self.neg]
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(self.mul[a] == 1)[0][0])
        self.inv = inv

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.k):
            out.append(a % self.p)
            a //= self.p
        return out

    def _encode(self, digits) -> int:
        return sum(int(d) * self.p**i for i, d in enumerate(digits))

    def embed_int(self, c: int) -> int:
        """Image of an integer under the prime-field embedding."""
        return c % self.p

    def __repr__(self):
        return f"GF({self.q})"


def _polymulmod(a, b, mod, p):
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    k = len(mod) - 1
    for d in range(len(prod) - 1, k - 1, -1):
        c = prod[d]
        if c:
            for i, m in enumerate(mod):
                prod[d - k + i] = (prod[d - k + i] - c * m) % p
    return prod[:k]


@lru_cache(maxsize=None)
def field(q: int) -> GF:
    return GF(q)
