"""Classes polynomial in the Lefschetz symbol ``L``, localized at ``[P^m]``.

Only the subring of the Grothendieck ring generated by ``L`` is modelled; all
gallery spaces and toric strata live there.  Polynomials are
:class:`flint.fmpz_poly` in ``L``.
"""

from __future__ import annotations

import itertools
import json
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

import flint

from .chow import RegistryError, canonical_name
from . import toric

L = flint.fmpz_poly([0, 1])


class MotiveError(ValueError):
    pass


def projective_class(m: int) -> flint.fmpz_poly:
    """``[P^m] = 1 + L + ... + L^m``."""
    if m < 0:
        raise MotiveError("negative projective dimension")
    return flint.fmpz_poly([1] * (m + 1))


def _coeffs(p: flint.fmpz_poly) -> list[int]:
    return [int(c) for c in p.coeffs()] or [0]


class MotiveExpr:
    """``numerator / prod_m [P^m]^{a_m}`` with an integer polynomial numerator."""

    __slots__ = ("num", "den")

    def __init__(self, num, den: Mapping[int, int] | None = None):
        if isinstance(num, (list, tuple)):
            num = flint.fmpz_poly([int(c) for c in num])
        elif isinstance(num, int):
            num = flint.fmpz_poly([num])
        den = Counter({m: a for m, a in (den or {}).items() if a})
        if any(a < 0 for a in den.values()):
            raise MotiveError("denominator exponents must be non-negative")
        den.pop(0, None)  # [P^0] = 1
        for m in sorted(den):
            pm = projective_class(m)
            while den[m] and not num.is_zero():
                qt, rem = divmod(num, pm)
                if not rem.is_zero():
                    break
                num = qt
                den[m] -= 1
            if not den[m]:
                del den[m]
            if num.is_zero():
                den = Counter()
                break
        self.num = num
        self.den = den

    @classmethod
    def lefschetz(cls) -> "MotiveExpr":
        return cls(L)

    @classmethod
    def projective(cls, m: int) -> "MotiveExpr":
        return cls(projective_class(m))

    def denominator(self) -> flint.fmpz_poly:
        out = flint.fmpz_poly([1])
        for m, a in self.den.items():
            out *= projective_class(m) ** a
        return out

    def is_polynomial(self) -> bool:
        return not self.den

    def polynomial(self) -> list[int]:
        if self.den:
            raise MotiveError("class is not a polynomial in L")
        return _coeffs(self.num)

    def _lift(self, other) -> "MotiveExpr":
        if isinstance(other, MotiveExpr):
            return other
        if isinstance(other, (int, flint.fmpz_poly)):
            return MotiveExpr(other)
        raise TypeError(f"cannot combine MotiveExpr with {type(other).__name__}")

    def __add__(self, other):
        other = self._lift(other)
        den = self.den | other.den
        a = self.num * _den_poly(den - self.den)
        b = other.num * _den_poly(den - other.den)
        return MotiveExpr(a + b, den)

    __radd__ = __add__

    def __neg__(self):
        return MotiveExpr(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        return MotiveExpr(self.num * other.num, self.den + other.den)

    __rmul__ = __mul__

    def divide_by_projective(self, m: int, times: int = 1) -> "MotiveExpr":
        return MotiveExpr(self.num, self.den + Counter({m: times}))

    def __eq__(self, other):
        try:
            other = self._lift(other)
        except TypeError:
            return NotImplemented
        return self.num * other.denominator() == other.num * self.denominator()

    __hash__ = None

    def evaluate(self, value) -> Fraction:
        value = Fraction(value)
        num = sum(Fraction(c) * value**i for i, c in enumerate(_coeffs(self.num)))
        den = Fraction(1)
        for m, a in self.den.items():
            den *= sum(value**i for i in range(m + 1)) ** a
        if den == 0:
            raise ZeroDivisionError(f"[P^m] vanishes at L = {value}")
        return num / den

    def to_document(self) -> dict:
        return {
            "numerator": _coeffs(self.num),
            "denominator": _coeffs(self.denominator()),
            "projective_factors": {str(m): a for m, a in sorted(self.den.items())},
        }

    def __repr__(self):
        if not self.den:
            return f"MotiveExpr({_fmt(self.num)})"
        dens = " ".join(f"[P^{m}]" + (f"^{a}" if a > 1 else "") for m, a in sorted(self.den.items()))
        return f"MotiveExpr(({_fmt(self.num)}) / {dens})"


def _den_poly(den: Counter) -> flint.fmpz_poly:
    out = flint.fmpz_poly([1])
    for m, a in den.items():
        if a > 0:
            out *= projective_class(m) ** a
    return out


def _fmt(p: flint.fmpz_poly, var: str = "L") -> str:
    terms = []
    for i, c in enumerate(_coeffs(p)):
        if c:
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            coef = str(c) if (c != 1 or not mono) else ""
            if c == -1 and mono:
                coef = "-"
            terms.append(f"{coef}{mono}")
    return " + ".join(terms).replace("+ -", "- ") or "0"


# -- classes of spaces ------------------------------------------------------------------


def toric_class(space: toric.ToricSpace) -> MotiveExpr:
    """Orbit decomposition: ``sum over cones of (L - 1)^{n - dim}``."""
    out = flint.fmpz_poly([0])
    for f in space.faces:
        out += (L - 1) ** (space.dim - len(f))
    return MotiveExpr(out)


def class_of(space) -> MotiveExpr:
    if isinstance(space, toric.ToricSpace):
        return toric_class(space)
    if isinstance(space, str):
        key = canonical_name(space)
        if key == "pt":
            return MotiveExpr(1)
        if "/" in key:
            pair, side = key.rsplit("/", 1)
            X, Xp, _ = toric.flop_pair(pair)
            return toric_class(X if side == "A" else Xp)
        try:
            return toric_class(toric.gallery_fan(key))
        except RegistryError:
            raise MotiveError(f"no class registered for {space!r}") from None
    raise MotiveError(f"unsupported space {space!r}")


@dataclass
class MotiveReport:
    claim: str
    status: str
    lhs: object = None
    rhs: object = None
    difference: object = None
    details: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def to_document(self) -> dict:
        def doc(v):
            if isinstance(v, MotiveExpr):
                return v.to_document()
            if isinstance(v, dict):
                return {str(a): doc(b) for a, b in v.items()}
            if isinstance(v, (list, tuple)):
                return [doc(x) for x in v]
            return v

        return {
            "claim": self.claim,
            "status": self.status,
            "lhs": doc(self.lhs),
            "rhs": doc(self.rhs),
            "difference": doc(self.difference),
            "details": doc(self.details),
        }


@dataclass(frozen=True)
class BlowupClasses:
    name: str
    X: MotiveExpr
    Y: MotiveExpr
    E: MotiveExpr
    Z: MotiveExpr
    codim: int


def gallery_blowup_classes() -> list[BlowupClasses]:
    P1 = class_of("P1")
    return [
        BlowupClasses("Bl_pt P2", class_of("P2"), class_of("Bl_pt P2"), P1, MotiveExpr(1), 2),
        BlowupClasses("Bl_pt P3", class_of("P3"), class_of("Bl_pt P3"), class_of("P2"), MotiveExpr(1), 3),
        BlowupClasses("Bl_line P3", class_of("P3"), class_of("Bl_line P3"), class_of("P1xP1"), P1, 2),
    ]


def blowup_identity(data: BlowupClasses) -> list[MotiveReport]:
    """``[X] = [Y] - [E] + [Z]`` and ``[X] = ([Y] - [E]) + [E] [P^{r-1}]^{-1}``."""
    out = []
    rhs = data.Y - data.E + data.Z
    diff = data.X - rhs
    out.append(MotiveReport(f"blow-up relation on {data.name}", "verified" if diff == 0 else "refuted", data.X, rhs, diff))
    rhs = (data.Y - data.E) + data.E.divide_by_projective(data.codim - 1)
    diff = data.X - rhs
    out.append(MotiveReport(f"localized blow-up relation on {data.name}", "verified" if diff == 0 else "refuted", data.X, rhs, diff))
    return out


# -- SNC data and stringy invariants ---------------------------------------------------


@dataclass
class SncResolutionData:
    """Strata ``[E°_I]`` of an SNC exceptional locus with discrepancies ``e_i``."""

    strata: dict[frozenset, MotiveExpr]
    discrepancies: dict[int, int]
    resolved_class: MotiveExpr
    name: str = "resolution"

    def validate(self):
        for I in self.strata:
            if not set(I) <= set(self.discrepancies):
                raise MotiveError(f"stratum {sorted(I)} names an unknown divisor")
        for i, e in self.discrepancies.items():
            if e < 0 or int(e) != e:
                raise MotiveError(f"discrepancy of divisor {i} must be a non-negative integer, got {e}")
        total = MotiveExpr(0)
        for cls in self.strata.values():
            total = total + cls
        if total != self.resolved_class:
            raise MotiveError(f"strata do not sum to [Y]: {total} != {self.resolved_class}")

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "strata": [
                {"subset": sorted(I), "class_coeffs": cls.polynomial() if cls.is_polynomial() else cls.to_document()}
                for I, cls in sorted(self.strata.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))
            ],
            "discrepancies": {str(i): e for i, e in sorted(self.discrepancies.items())},
            "resolved_class": _coeffs(self.resolved_class.num) if self.resolved_class.is_polynomial() else self.resolved_class.to_document(),
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "SncResolutionData":
        try:
            strata = {}
            for k, entry in enumerate(doc["strata"]):
                I = frozenset(int(i) for i in entry["subset"])
                if I in strata:
                    raise MotiveError(f"strata[{k}]: duplicate subset {sorted(I)}")
                strata[I] = MotiveExpr([int(c) for c in entry["class_coeffs"]])
            disc = {int(i): int(e) for i, e in doc["discrepancies"].items()}
            Y = MotiveExpr([int(c) for c in doc["resolved_class"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise MotiveError(f"malformed resolution document: {exc!r}") from None
        data = cls(strata, disc, Y, str(doc.get("name", "resolution")))
        data.validate()
        return data


def snc_class(data: SncResolutionData) -> MotiveExpr:
    """``sum_I [E°_I] prod_{i in I} [P^{e_i}]^{-1}``, checked against the
    ``prod (L-1)/(L^{e_i+1}-1)`` form by cross-multiplication."""
    data.validate()
    total = MotiveExpr(0)
    for I, cls in data.strata.items():
        term = cls
        for i in I:
            term = term.divide_by_projective(data.discrepancies[i])
        total = total + term
    num, den = snc_class_lefschetz_form(data)
    if total.num * den != num * total.denominator():
        raise MotiveError("the two forms of the SNC formula disagree")
    return total


def snc_class_lefschetz_form(data: SncResolutionData) -> tuple[flint.fmpz_poly, flint.fmpz_poly]:
    """Same sum written with ``(L - 1) / (L^{e+1} - 1)`` factors, as a plain fraction."""
    num = flint.fmpz_poly([0])
    den = flint.fmpz_poly([1])
    for I, cls in data.strata.items():
        tn = cls.num
        td = cls.denominator()
        for i in I:
            e = data.discrepancies[i]
            tn = tn * (L - 1)
            td = td * (L ** (e + 1) - 1)
        num = num * td + tn * den
        den = den * td
        g = num.gcd(den)
        num, den = num // g, den // g
    return num, den


def snc_forms_agree(data: SncResolutionData) -> bool:
    first = MotiveExpr(0)
    for I, cls in data.strata.items():
        term = cls
        for i in I:
            term = term.divide_by_projective(data.discrepancies[i])
        first = first + term
    num, den = snc_class_lefschetz_form(data)
    return first.num * den == num * first.denominator()


@dataclass
class StringyE:
    numerator: list[int]
    denominator: list[int]
    polynomial: list[int] | None

    def hodge_table(self) -> dict[str, int] | None:
        """Stringy Hodge numbers ``h^{p,p}`` (coefficients of ``(uv)^p``), unclamped."""
        if self.polynomial is None:
            return None
        return {f"h^{p},{p}": c for p, c in enumerate(self.polynomial)}

    def to_document(self) -> dict:
        return {
            "variable": "uv",
            "numerator": self.numerator,
            "denominator": self.denominator,
            "polynomial": self.polynomial,
            "stringy_hodge_numbers": self.hodge_table(),
        }

    def __eq__(self, other):
        if not isinstance(other, StringyE):
            return NotImplemented
        a = flint.fmpz_poly(self.numerator) * flint.fmpz_poly(other.denominator)
        b = flint.fmpz_poly(other.numerator) * flint.fmpz_poly(self.denominator)
        return a == b

    __hash__ = None


def stringy_e(data: SncResolutionData) -> StringyE:
    m = snc_class(data)
    poly = _coeffs(m.num) if m.is_polynomial() else None
    return StringyE(_coeffs(m.num), _coeffs(m.denominator()), poly)


# -- toric resolutions of singular cones ---------------------------------------------


@dataclass(frozen=True)
class ConeModel:
    name: str
    dim: int
    rays: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ToricResolution:
    model: ConeModel
    name: str
    extra_rays: tuple[tuple[int, ...], ...]
    cones: tuple[tuple[int, ...], ...]

    @property
    def rays(self) -> tuple[tuple[int, ...], ...]:
        return self.model.rays + self.extra_rays


def _gorenstein_form(model: ConeModel) -> tuple[Fraction, ...]:
    n = model.dim
    rows = [list(r) for r in model.rays]
    A = flint.fmpq_mat(len(rows), n, [a for r in rows for a in r])
    b = flint.fmpq_mat(len(rows), 1, [1] * len(rows))
    # least-squares-free exact solve: pick n independent rows, then check all
    for idx in itertools.combinations(range(len(rows)), n):
        sub = flint.fmpq_mat(n, n, [a for i in idx for a in rows[i]])
        if sub.det() == 0:
            continue
        m = sub.solve(flint.fmpq_mat(n, 1, [1] * n))
        if A * m == b:
            return tuple(Fraction(int(m[i, 0].p), int(m[i, 0].q)) for i in range(n))
        raise MotiveError(f"{model.name}: cone is not Gorenstein; discrepancies are not integral here")
    raise MotiveError(f"{model.name}: cone is not full-dimensional")


def _validate_resolution(res: ToricResolution):
    n = res.model.dim
    rays = res.rays
    for c in res.cones:
        if len(c) != n:
            raise MotiveError(f"{res.name}: cone {list(c)} is not full-dimensional simplicial")
        d = int(flint.fmpz_mat(n, n, [a for i in c for a in rays[i]]).det())
        if abs(d) != 1:
            raise toric.SmoothnessError(c, d)
    inv_model = _cone_inequalities(res.model)
    rng = random.Random(7)
    for _ in range(48):
        coeffs = [rng.randint(1, 50) for _ in res.model.rays]
        v = [sum(c * r[j] for c, r in zip(coeffs, res.model.rays)) for j in range(n)]
        hits = 0
        wall = False
        for c in res.cones:
            m = flint.fmpq_mat(n, n, [rays[i][j] for j in range(n) for i in c]).inv()
            coords = m * flint.fmpq_mat(n, 1, v)
            vals = [coords[i, 0] for i in range(n)]
            if all(x > 0 for x in vals):
                hits += 1
            elif all(x >= 0 for x in vals):
                wall = True
        if not wall and hits != 1:
            raise MotiveError(f"{res.name}: subdivision does not tile the cone (vector {v} in {hits} cones)")
    for r in res.extra_rays:
        if not inv_model(r):
            raise MotiveError(f"{res.name}: extra ray {list(r)} lies outside the cone")


def _cone_inequalities(model: ConeModel):
    n = model.dim
    rays = model.rays

    def inside(v):
        for idx in itertools.combinations(range(len(rays)), n):
            sub = flint.fmpq_mat(n, n, [rays[i][j] for j in range(n) for i in idx])
            if sub.det() == 0:
                continue
            coords = sub.inv() * flint.fmpq_mat(n, 1, list(v))
            if all(coords[i, 0] >= 0 for i in range(n)):
                return True
        return False

    return inside


def toric_resolution_data(res: ToricResolution) -> SncResolutionData:
    """Strata of the exceptional divisors (the extra rays) through orbit counting."""
    _validate_resolution(res)
    n = res.model.dim
    m_K = _gorenstein_form(res.model)
    base = len(res.model.rays)
    exceptional = list(range(base, base + len(res.extra_rays)))
    disc = {}
    for i in exceptional:
        a = sum(x * y for x, y in zip(m_K, res.rays[i])) - 1
        if a.denominator != 1:
            raise MotiveError("non-integral discrepancy")
        disc[i] = int(a)
    faces = set()
    for c in res.cones:
        for k in range(n + 1):
            for f in itertools.combinations(sorted(c), k):
                faces.add(f)
    strata: dict[frozenset, flint.fmpz_poly] = {}
    total = flint.fmpz_poly([0])
    for f in faces:
        I = frozenset(i for i in f if i in disc)
        term = (L - 1) ** (n - len(f))
        strata[I] = strata.get(I, flint.fmpz_poly([0])) + term
        total += term
    return SncResolutionData(
        {I: MotiveExpr(p) for I, p in strata.items()},
        disc,
        MotiveExpr(total),
        f"{res.model.name}:{res.name}",
    )


@lru_cache(maxsize=None)
def _models() -> dict:
    return json.loads(resources.files("kequiv").joinpath("data/singular_models.json").read_text())


def singular_model_names() -> list[str]:
    return [m["name"] for m in _models()["models"]]


def singular_model(name: str) -> tuple[ConeModel, list[ToricResolution]]:
    for doc in _models()["models"]:
        if doc["name"] == name:
            model = ConeModel(doc["name"], int(doc["dim"]), tuple(tuple(r) for r in doc["rays"]))
            res = [
                ToricResolution(model, r["name"], tuple(tuple(v) for v in r["extra_rays"]), tuple(tuple(c) for c in r["cones"]))
                for r in doc["resolutions"]
            ]
            return model, res
    raise RegistryError(f"no singular model named {name!r}")


def blowup_snc_data(data: BlowupClasses, discrepancy: int) -> SncResolutionData:
    """Single smooth exceptional divisor: ``E°_∅ = [Y] - [E]`` and ``E°_{1} = [E]``."""
    return SncResolutionData(
        {frozenset(): data.Y - data.E, frozenset({1}): data.E}, {1: discrepancy}, data.Y, data.name
    )
