"""Exact truncated multivariate power/Laurent series.

Coefficients live in the field ``Q(k, y)`` of rational functions in the two
symbolic parameters ``k`` (twist) and ``y`` (the marked point, a formal unit).
Internally a series keeps one common denominator, a polynomial in ``(k, y)``,
and stores numerators as :class:`flint.fmpq_mpoly` objects.  The nome ``q`` is
not a parameter: it is an ordinary truncated series variable, so "q-order M"
means a ring declared with ``q`` truncated at ``M``.

Truncation is per variable and silent: any term whose exponent exceeds the
declared order of its variable is discarded.  One variable may be declared
Laurent, with exponents allowed down to ``-pole``; products that would go below
the pole bound raise :class:`PoleBoundError`.  In Laurent mode a product
coefficient of degree ``d`` is only reliable for ``d <= order - (pole orders of
the factors)``; callers size the order accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import flint

PARAMS = ("k", "y")
_CTX = flint.fmpq_mpoly_ctx.get(PARAMS, "lex")
_K, _Y = _CTX.gens()
_ONE = _CTX.constant(1)
_ZERO = _CTX.constant(0)


class SeriesError(ValueError):
    """Structural misuse of the series ring (incompatible rings, bad variables)."""


class NonUnitError(SeriesError):
    """Inversion of a series whose leading coefficient is not a unit."""


class PoleBoundError(SeriesError):
    """A Laurent exponent fell below the declared pole bound."""


def _poly(value) -> flint.fmpq_mpoly:
    if isinstance(value, flint.fmpq_mpoly):
        return value
    if isinstance(value, Fraction):
        return _CTX.constant(flint.fmpq(value.numerator, value.denominator))
    if isinstance(value, int):
        return _CTX.constant(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to a coefficient")


def _monic(den: flint.fmpq_mpoly) -> flint.fmpq:
    return den.leading_coefficient()


def _poly_doc(p: flint.fmpq_mpoly) -> dict[str, str]:
    out = {}
    for (a, b), c in zip(p.monoms(), p.coeffs()):
        out[f"k^{a} y^{b}"] = str(c) if c.q != 1 else str(c.p)
    return dict(sorted(out.items()))


def _poly_from_doc(doc: Mapping[str, str]) -> flint.fmpq_mpoly:
    terms = {}
    for key, val in doc.items():
        parts = key.split()
        if len(parts) != 2 or not parts[0].startswith("k^") or not parts[1].startswith("y^"):
            raise SeriesError(f"bad parameter monomial key {key!r}")
        exps = (int(parts[0][2:]), int(parts[1][2:]))
        fr = Fraction(val)
        terms[exps] = flint.fmpq(fr.numerator, fr.denominator)
    return _CTX.from_dict(terms) if terms else _CTX.constant(0)


def _subs_poly(p: flint.fmpq_mpoly, kv, yv, kdeg: int, ydeg: int) -> flint.fmpq_mpoly:
    """Homogenized substitution k -> kn/kd, y -> yn/yd, scaled by kd^kdeg * yd^ydeg."""
    (kn, kd), (yn, yd) = kv, yv
    out = _CTX.constant(0)
    for (a, b), c in zip(p.monoms(), p.coeffs()):
        out += c * kn**a * kd ** (kdeg - a) * yn**b * yd ** (ydeg - b)
    return out


class RatFunc:
    """Reduced element of Q(k, y); the denominator is normalized to be monic."""

    __slots__ = ("num", "den")

    def __init__(self, num=0, den=1, *, reduce: bool = True):
        num, den = _poly(num), _poly(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if reduce and not den.is_constant():
            g = num.gcd(den)
            if not g.is_one():
                num, den = num / g, den / g
        lc = _monic(den)
        if lc != 1:
            num, den = num / lc, den / lc
        self.num, self.den = num, den

    @classmethod
    def param(cls, name: str) -> "RatFunc":
        return cls(_CTX.gen(PARAMS.index(name)))

    @classmethod
    def coerce(cls, value) -> "RatFunc":
        if isinstance(value, RatFunc):
            return value
        return cls(value)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def to_fraction(self) -> Fraction:
        if not self.is_constant():
            raise SeriesError(f"{self} still depends on parameters")
        c = self.num.leading_coefficient() if not self.num.is_zero() else flint.fmpq(0)
        c = c / self.den.leading_coefficient()
        return Fraction(int(c.p), int(c.q))

    def __add__(self, other):
        other = RatFunc.coerce(other)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        return self + (-RatFunc.coerce(other))

    def __rsub__(self, other):
        return RatFunc.coerce(other) - self

    def __mul__(self, other):
        other = RatFunc.coerce(other)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RatFunc.coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return RatFunc.coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return RatFunc(1) / self**-n
        return RatFunc(self.num**n, self.den**n, reduce=False)

    def __eq__(self, other):
        try:
            other = RatFunc.coerce(other)
        except TypeError:
            return NotImplemented
        return self.num * other.den == other.num * self.den

    __hash__ = None

    def subs(self, **values) -> "RatFunc":
        """Substitute parameters by rational functions (e.g. ``y=-1/y``)."""
        kv = RatFunc.coerce(values.get("k", RatFunc.param("k")))
        yv = RatFunc.coerce(values.get("y", RatFunc.param("y")))
        kdeg = max(self.num.degrees()[0], self.den.degrees()[0])
        ydeg = max(self.num.degrees()[1], self.den.degrees()[1])
        kpair, ypair = (kv.num, kv.den), (yv.num, yv.den)
        return RatFunc(
            _subs_poly(self.num, kpair, ypair, kdeg, ydeg),
            _subs_poly(self.den, kpair, ypair, kdeg, ydeg),
        )

    def to_document(self) -> dict:
        return {"numerator": _poly_doc(self.num), "denominator": _poly_doc(self.den)}

    @classmethod
    def from_document(cls, doc: Mapping) -> "RatFunc":
        return cls(_poly_from_doc(doc["numerator"]), _poly_from_doc(doc["denominator"]))

    def __repr__(self):
        if self.den.is_one():
            return f"RatFunc({self.num})"
        return f"RatFunc(({self.num}) / ({self.den}))"

    __str__ = __repr__


@dataclass(frozen=True)
class CoeffRing:
    """Which parameters a computation uses, and the truncation order of ``q``.

    ``k`` and ``y`` are symbolic when enabled; ``q_order=None`` means no ``q``.
    """

    k: bool = False
    y: bool = False
    q_order: int | None = None

    def __post_init__(self):
        if self.q_order is not None and self.q_order < 0:
            raise SeriesError("q-order must be non-negative")

    def series_ring(self, variables: Mapping[str, int], laurent: str | None = None, pole: int = 0) -> "SeriesRing":
        names = list(variables)
        orders = [variables[v] for v in names]
        if self.q_order is not None:
            if "q" in variables:
                raise SeriesError("q is supplied by the coefficient ring")
            names.append("q")
            orders.append(self.q_order)
        return SeriesRing(tuple(names), tuple(orders), laurent, pole)


@dataclass(frozen=True)
class SeriesRing:
    """Variables with per-variable truncation orders, optionally one Laurent variable."""

    variables: tuple[str, ...]
    orders: tuple[int, ...]
    laurent: str | None = None
    pole: int = 0

    def __post_init__(self):
        if len(self.variables) != len(self.orders):
            raise SeriesError("one truncation order per variable")
        if len(set(self.variables)) != len(self.variables):
            raise SeriesError("duplicate variable names")
        if any(v in PARAMS for v in self.variables):
            raise SeriesError("k and y are coefficient parameters, not series variables")
        if any(o < 0 for o in self.orders):
            raise SeriesError("truncation orders must be non-negative")
        if self.laurent is None and self.pole:
            raise SeriesError("pole bound without a Laurent variable")
        if self.laurent is not None and self.laurent not in self.variables:
            raise SeriesError(f"Laurent variable {self.laurent!r} is not a ring variable")
        if self.pole < 0:
            raise SeriesError("pole bound must be non-negative")

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise SeriesError(f"{var!r} is not a variable of {self}") from None

    def lower(self, i: int) -> int:
        return -self.pole if self.variables[i] == self.laurent else 0

    def order(self, var: str) -> int:
        return self.orders[self.index(var)]

    def zero(self) -> "Series":
        return Series(self, {})

    def one(self) -> "Series":
        return self.const(1)

    def const(self, value) -> "Series":
        if isinstance(value, RatFunc):
            return Series(self, {self._origin: value.num}, value.den)
        return Series(self, {self._origin: _poly(value)})

    def param(self, name: str) -> "Series":
        return self.const(RatFunc.param(name))

    def gen(self, var: str) -> "Series":
        return self.monomial({var: 1})

    def monomial(self, exps: Mapping[str, int], coeff=1) -> "Series":
        e = [0] * self.nvars
        for v, a in exps.items():
            e[self.index(v)] = a
        if isinstance(coeff, RatFunc):
            return Series(self, {tuple(e): coeff.num}, coeff.den)
        return Series(self, {tuple(e): _poly(coeff)})

    def from_coefficients(self, var: str, coeffs: Iterable) -> "Series":
        """Univariate constructor: ``sum(c_j * var**j)``."""
        out = self.zero()
        for j, c in enumerate(coeffs):
            if c:
                out = out + self.monomial({var: j}, c)
        return out

    @property
    def _origin(self) -> tuple[int, ...]:
        return (0,) * self.nvars

    def with_orders(self, **orders: int) -> "SeriesRing":
        new = list(self.orders)
        for v, o in orders.items():
            new[self.index(v)] = o
        return SeriesRing(self.variables, tuple(new), self.laurent, self.pole)

    def with_laurent(self, var: str | None, pole: int = 0) -> "SeriesRing":
        return SeriesRing(self.variables, self.orders, var, pole)

    def without(self, var: str) -> "SeriesRing":
        i = self.index(var)
        laurent = None if self.laurent == var else self.laurent
        return SeriesRing(
            self.variables[:i] + self.variables[i + 1 :],
            self.orders[:i] + self.orders[i + 1 :],
            laurent,
            self.pole if laurent else 0,
        )

    def adjoin(self, var: str, order: int, *, laurent: bool = False, pole: int = 0) -> "SeriesRing":
        if laurent and self.laurent is not None:
            raise SeriesError("only one Laurent variable per ring")
        return SeriesRing(
            self.variables + (var,),
            self.orders + (order,),
            var if laurent else self.laurent,
            pole if laurent else self.pole,
        )

    def __str__(self):
        body = ", ".join(f"{v}<={o}" for v, o in zip(self.variables, self.orders))
        if self.laurent:
            body += f"; {self.laurent}>=-{self.pole}"
        return f"SeriesRing({body})"


class Series:
    """Immutable truncated series with a common ``(k, y)`` denominator."""

    __slots__ = ("ring", "terms", "den", "exact")

    def __init__(self, ring: SeriesRing, terms: Mapping, den=None, exact: bool = True):
        den = _ONE if den is None else _poly(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        clean = {}
        for e, c in terms.items():
            c = _poly(c)
            if c.is_zero():
                continue
            e = tuple(e)
            if len(e) != ring.nvars:
                raise SeriesError("exponent vector length does not match the ring")
            if any(a > o for a, o in zip(e, ring.orders)):
                exact = False
                continue
            for i, a in enumerate(e):
                if a < ring.lower(i):
                    if ring.variables[i] == ring.laurent:
                        raise PoleBoundError(
                            f"exponent {a} of {ring.laurent} is below the pole bound -{ring.pole}"
                        )
                    raise SeriesError(f"negative exponent in non-Laurent variable {ring.variables[i]!r}")
            clean[e] = c
        if den.is_constant() and not den.is_one():
            inv = 1 / den.leading_coefficient()
            clean = {e: c * inv for e, c in clean.items()}
            den = _ONE
        self.ring = ring
        self.terms = clean
        self.den = den
        self.exact = exact

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, exps: Mapping[str, int] | tuple = ()) -> RatFunc:
        if isinstance(exps, tuple):
            e = exps if exps else self.ring._origin
        else:
            e = [0] * self.ring.nvars
            for v, a in exps.items():
                e[self.ring.index(v)] = a
            e = tuple(e)
        c = self.terms.get(e)
        return RatFunc(0) if c is None else RatFunc(c, self.den)

    def constant_term(self) -> RatFunc:
        return self.coefficient(self.ring._origin)

    def coefficient_series(self, var: str, j: int) -> "Series":
        """The coefficient of ``var**j`` as a series in the remaining variables."""
        i = self.ring.index(var)
        sub = self.ring.without(var)
        terms = {e[:i] + e[i + 1 :]: c for e, c in self.terms.items() if e[i] == j}
        return Series(sub, terms, self.den, self.exact)

    def valuation(self, var: str) -> int | None:
        i = self.ring.index(var)
        return min((e[i] for e in self.terms), default=None)

    def degree(self, var: str) -> int | None:
        i = self.ring.index(var)
        return max((e[i] for e in self.terms), default=None)

    def items(self):
        """Yield ``(exponent tuple, RatFunc)`` pairs in sorted exponent order."""
        for e in sorted(self.terms):
            yield e, RatFunc(self.terms[e], self.den)

    def scalar(self) -> RatFunc:
        if any(any(e) for e in self.terms):
            raise SeriesError("series is not a constant")
        return self.constant_term()

    # -- ring plumbing ----------------------------------------------------

    def _check(self, other: "Series"):
        if self.ring != other.ring:
            raise SeriesError(f"incompatible rings {self.ring} and {other.ring}")

    def _coerce(self, other) -> "Series":
        if isinstance(other, Series):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, RatFunc, flint.fmpq_mpoly)):
            return self.ring.const(other)
        raise TypeError(f"cannot combine Series with {type(other).__name__}")

    def embed(self, ring: SeriesRing) -> "Series":
        """Re-home into a ring whose variables include ours (orders may differ)."""
        idx = [ring.index(v) for v in self.ring.variables]
        terms = {}
        for e, c in self.terms.items():
            new = [0] * ring.nvars
            for i, a in zip(idx, e):
                new[i] = a
            terms[tuple(new)] = c
        out = Series(ring, terms, self.den, self.exact)
        return out

    def truncate(self, **orders: int) -> "Series":
        return self.embed(self.ring.with_orders(**orders))

    def reduced(self) -> "Series":
        """Cancel common factors between the denominator and every numerator."""
        if self.den.is_constant():
            return self
        g = self.den
        for c in self.terms.values():
            g = g.gcd(c)
            if g.is_constant():
                break
        lc = g.leading_coefficient() if not g.is_constant() else None
        if g.is_constant():
            lc = _monic(self.den)
            if lc == 1:
                return self
            return Series(self.ring, {e: c / lc for e, c in self.terms.items()}, self.den / lc, self.exact)
        den = self.den / g
        terms = {e: c / g for e, c in self.terms.items()}
        lc = _monic(den)
        return Series(self.ring, {e: c / lc for e, c in terms.items()}, den / lc, self.exact)

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return Series(self.ring, {e: -c for e, c in self.terms.items()}, self.den, self.exact)

    def __add__(self, other):
        other = self._coerce(other)
        if not other.terms:
            return self if other.exact else Series(self.ring, self.terms, self.den, False)
        if not self.terms:
            return other if self.exact else Series(other.ring, other.terms, other.den, False)
        exact = self.exact and other.exact
        if self.den == other.den:
            terms = dict(self.terms)
            for e, c in other.terms.items():
                terms[e] = terms[e] + c if e in terms else c
            return Series(self.ring, terms, self.den, exact).reduced()
        g = self.den.gcd(other.den)
        fa, fb = other.den / g, self.den / g
        terms = {e: c * fa for e, c in self.terms.items()}
        for e, c in other.terms.items():
            c = c * fb
            terms[e] = terms[e] + c if e in terms else c
        return Series(self.ring, terms, fb * other.den, exact).reduced()

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self.ring.zero()
            c = _poly(other)
            return Series(self.ring, {e: v * c for e, v in self.terms.items()}, self.den, self.exact)
        if isinstance(other, RatFunc):
            return Series(
                self.ring, {e: v * other.num for e, v in self.terms.items()}, self.den * other.den, self.exact
            ).reduced()
        other = self._coerce(other)
        return series_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, RatFunc)):
            return self * (RatFunc(1) / RatFunc.coerce(other))
        return self * series_invert(self._coerce(other))

    def __rtruediv__(self, other):
        return self._coerce(other) * series_invert(self)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("integer powers only")
        if n < 0:
            return series_invert(self) ** (-n)
        result = self.ring.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Series):
            if self.ring != other.ring:
                return False
        else:
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def derivative(self, var: str) -> "Series":
        """Formal derivative; the top coefficient (degree = order) is lost, so the
        result is exact only below the declared order of ``var``."""
        i = self.ring.index(var)
        terms = {}
        for e, c in self.terms.items():
            a = e[i]
            if a == 0:
                continue
            new = e[:i] + (a - 1,) + e[i + 1 :]
            terms[new] = c * a
        return Series(self.ring, terms, self.den, False)

    def subs_params(self, **values) -> "Series":
        """Substitute the parameters ``k``/``y`` by rational functions or numbers."""
        kv = RatFunc.coerce(values.get("k", RatFunc.param("k")))
        yv = RatFunc.coerce(values.get("y", RatFunc.param("y")))
        polys = list(self.terms.values()) + [self.den]
        kdeg = max(p.degrees()[0] for p in polys)
        ydeg = max(p.degrees()[1] for p in polys)
        kp, yp = (kv.num, kv.den), (yv.num, yv.den)
        den = _subs_poly(self.den, kp, yp, kdeg, ydeg)
        if den.is_zero():
            raise ZeroDivisionError("parameter substitution annihilates the denominator")
        terms = {e: _subs_poly(c, kp, yp, kdeg, ydeg) for e, c in self.terms.items()}
        return Series(self.ring, terms, den, self.exact).reduced()

    # -- serialization ----------------------------------------------------

    def to_document(self) -> dict:
        s = self.reduced()
        return {
            "variables": list(s.ring.variables),
            "orders": list(s.ring.orders),
            "laurent": s.ring.laurent,
            "pole_bound": s.ring.pole,
            "denominator": _poly_doc(s.den),
            "terms": {
                ",".join(map(str, e)): _poly_doc(s.terms[e]) for e in sorted(s.terms)
            },
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "Series":
        ring = SeriesRing(
            tuple(doc["variables"]), tuple(doc["orders"]), doc.get("laurent"), doc.get("pole_bound", 0)
        )
        terms = {}
        for key, poly in doc["terms"].items():
            e = tuple(int(a) for a in key.split(",")) if key else ()
            terms[e] = _poly_from_doc(poly)
        return cls(ring, terms, _poly_from_doc(doc["denominator"]))

    def __repr__(self):
        if not self.terms:
            return f"Series(0; {self.ring})"
        parts = []
        for e in sorted(self.terms)[:12]:
            mono = "*".join(
                f"{v}^{a}" if a != 1 else v for v, a in zip(self.ring.variables, e) if a
            )
            parts.append(f"({self.terms[e]})" + (f"*{mono}" if mono else ""))
        more = " + ..." if len(self.terms) > 12 else ""
        den = "" if self.den.is_one() else f" / ({self.den})"
        return f"Series([{' + '.join(parts)}{more}]{den}; {self.ring})"


# -- spec operations ------------------------------------------------------


def series_mul(a: Series, b: Series) -> Series:
    """Truncated product; raises :class:`SeriesError` on incompatible rings."""
    if a.ring != b.ring:
        raise SeriesError(f"incompatible rings {a.ring} and {b.ring}")
    ring = a.ring
    if not a.terms or not b.terms:
        return Series(ring, {}, exact=a.exact and b.exact)
    orders = ring.orders
    lows = tuple(ring.lower(i) for i in range(ring.nvars))
    n = ring.nvars
    out: dict = {}
    dropped = False
    bitems = sorted(b.terms.items())
    for ea, ca in a.terms.items():
        for eb, cb in bitems:
            e = tuple(ea[i] + eb[i] for i in range(n))
            over = False
            for i in range(n):
                if e[i] > orders[i]:
                    over = True
                    break
                if e[i] < lows[i]:
                    raise PoleBoundError(
                        f"product exponent {e[i]} of {ring.variables[i]} below pole bound -{ring.pole}"
                    )
            if over:
                dropped = True
                continue
            p = ca * cb
            if e in out:
                out[e] += p
            else:
                out[e] = p
    return Series(ring, out, a.den * b.den, a.exact and b.exact and not dropped).reduced()


def _leading_unit(s: Series) -> tuple[tuple[int, ...], RatFunc]:
    ring = s.ring
    origin = ring._origin
    if ring.laurent is None:
        c = s.terms.get(origin)
        if c is None:
            raise NonUnitError("constant term is zero; the series is not a unit")
        return origin, RatFunc(c, s.den)
    li = ring.index(ring.laurent)
    candidates = sorted(
        e[li] for e in s.terms if all(a == 0 for i, a in enumerate(e) if i != li)
    )
    if not candidates:
        raise NonUnitError("no unit monomial in the Laurent variable")
    v = candidates[0]
    e = list(origin)
    e[li] = v
    e = tuple(e)
    return e, RatFunc(s.terms[e], s.den)


def _geometric(u: Series, limit: int) -> Series:
    """``1/(1+u)`` for a topologically nilpotent ``u``."""
    result = u.ring.one()
    power = u.ring.one()
    neg = -u
    for _ in range(limit):
        power = power * neg
        if power.is_zero():
            return Series(result.ring, result.terms, result.den, False)
        result = result + power
    raise SeriesError("perturbation is not nilpotent under the declared truncation")


def _iteration_limit(ring: SeriesRing) -> int:
    return sum(ring.orders) + ring.pole * (1 + sum(ring.orders)) + 2


def series_invert(a: Series) -> Series:
    """Inverse of a unit.

    Outside Laurent mode the constant term must be nonzero.  In Laurent mode the
    series must factor as ``c * t**v * (1 + u)`` with ``c`` a nonzero scalar and
    ``u`` nilpotent under truncation (for instance ``l - t`` with ``l**2 = 0``).
    """
    e, c = _leading_unit(a)
    ring = a.ring
    shift = {v: -x for v, x in zip(ring.variables, e) if x}
    inv_c = RatFunc(1) / c
    mono_inv = ring.monomial(shift) if shift else ring.one()
    u = _shift(a, shift) * inv_c - 1
    return _geometric(u, _iteration_limit(ring)) * mono_inv * inv_c


def _shift(s: Series, shift: Mapping[str, int]) -> Series:
    if not shift:
        return s
    delta = [0] * s.ring.nvars
    for v, a in shift.items():
        delta[s.ring.index(v)] = a
    terms = {tuple(x + d for x, d in zip(e, delta)): c for e, c in s.terms.items()}
    return Series(s.ring, terms, s.den, s.exact)


def _require_zero_constant(a: Series, what: str):
    if a.ring._origin in a.terms:
        raise SeriesError(f"{what} requires a zero constant term")
    if a.ring.laurent is not None:
        li = a.ring.index(a.ring.laurent)
        if any(e[li] < 0 for e in a.terms):
            raise SeriesError(f"{what} is undefined on series with poles")


def series_exp(a: Series) -> Series:
    _require_zero_constant(a, "exp")
    result = a.ring.one()
    term = a.ring.one()
    for j in range(1, _iteration_limit(a.ring) + 1):
        term = term * a * Fraction(1, j)
        if term.is_zero():
            return Series(result.ring, result.terms, result.den, a.is_zero())
        result = result + term
    raise SeriesError("exp did not terminate")


def series_log(u: Series) -> Series:
    c = u.terms.get(u.ring._origin)
    if c is None or RatFunc(c, u.den) != 1:
        raise SeriesError("log requires constant term 1")
    v = u - 1
    _require_zero_constant(v, "log")
    result = u.ring.zero()
    power = u.ring.one()
    for j in range(1, _iteration_limit(u.ring) + 1):
        power = power * v
        if power.is_zero():
            return Series(result.ring, result.terms, result.den, v.is_zero())
        result = result + power * Fraction((-1) ** (j + 1), j)
    raise SeriesError("log did not terminate")


def series_substitute(a: Series, assignments: Mapping[str, Series], ring: SeriesRing | None = None) -> Series:
    """Compose: replace each variable of ``a`` named in ``assignments``.

    Substituted series must live in the target ring (default: the ring of the
    first assignment).  Each must have zero constant term unless ``a`` is an
    exact polynomial in that variable.  Negative exponents (Laurent mode) are
    handled through :func:`series_invert` and are subject to the target pole
    bound.
    """
    if not assignments:
        return a
    target = ring or next(iter(assignments.values())).ring
    for v, s in assignments.items():
        a.ring.index(v)
        if s.ring != target:
            raise SeriesError(f"substitution for {v!r} is not in the target ring {target}")
        has_const = target._origin in s.terms
        if has_const and not a.exact:
            raise SeriesError(
                f"substituting a series with nonzero constant term for {v!r} needs an exact polynomial"
            )
    keep = [v for v in a.ring.variables if v not in assignments]
    for v in keep:
        target.index(v)
    names = list(assignments)
    idx = [a.ring.index(v) for v in names]
    keep_idx = [(a.ring.index(v), target.index(v)) for v in keep]
    powers: dict = {}

    def power(j: int, n: int) -> Series:
        key = (j, n)
        if key not in powers:
            s = assignments[names[j]]
            if n == 0:
                powers[key] = target.one()
            elif n < 0:
                powers[key] = power(j, n + 1) * series_invert(s)
            else:
                powers[key] = power(j, n - 1) * s
        return powers[key]

    grouped: dict = {}
    for e, c in a.terms.items():
        sub_e = tuple(e[i] for i in idx)
        rest = [0] * target.nvars
        for i_src, i_dst in keep_idx:
            rest[i_dst] = e[i_src]
        grouped.setdefault(sub_e, {})[tuple(rest)] = c
    result = target.zero()
    for sub_e, rest_terms in sorted(grouped.items()):
        piece = Series(target, rest_terms, a.den, a.exact)
        for j, n in enumerate(sub_e):
            if n:
                piece = piece * power(j, n)
        result = result + piece
    if not a.exact:
        result = Series(result.ring, result.terms, result.den, False)
    return result


def residue(a: Series, var: str) -> Series:
    """Coefficient of ``var**-1`` of a Laurent series, as a series in the other variables."""
    if a.ring.laurent != var:
        raise SeriesError(f"{var!r} is not the designated Laurent variable of {a.ring}")
    return a.coefficient_series(var, -1)


def series_derivative(a: Series, var: str) -> Series:
    return a.derivative(var)


def exp_series(ring: SeriesRing, var: str, scale=1) -> Series:
    """``exp(scale * var)`` truncated to the ring's order in ``var``."""
    n = ring.order(var)
    coeffs = []
    for j in range(n + 1):
        coeffs.append(RatFunc.coerce(scale) ** j * RatFunc(Fraction(1, math.factorial(j))))
    out = ring.zero()
    for j, c in enumerate(coeffs):
        if not c.is_zero():
            out = out + ring.monomial({var: j}, c)
    return Series(out.ring, out.terms, out.den, False)


def param(name: str) -> RatFunc:
    """The symbolic parameter ``k`` or ``y`` as a rational function."""
    return RatFunc.param(name)
