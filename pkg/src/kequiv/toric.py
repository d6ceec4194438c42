"""Smooth complete toric varieties from fans.

Validation (primitive rays, unimodular cones, completeness), the Chow ring via
the Stanley-Reisner and linear relations, a direct intersection-number
reduction, orbit-sum point counts and E-polynomials, and shipped flop twins.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

import flint

from .chow import ChowPresentation, RegistryError, canonical_name


class FanError(ValueError):
    """Malformed fan document."""


class SmoothnessError(FanError):
    def __init__(self, cone, det):
        super().__init__(f"cone {list(cone)} is not unimodular (determinant {det})")
        self.cone = tuple(cone)
        self.det = det


class CompletenessError(FanError):
    pass


class FlopError(ValueError):
    pass


@dataclass(frozen=True)
class Fan:
    name: str
    dim: int
    rays: tuple[tuple[int, ...], ...]
    cones: tuple[tuple[int, ...], ...]

    @classmethod
    def from_document(cls, doc: Mapping) -> "Fan":
        for key in ("dim", "rays", "cones"):
            if key not in doc:
                raise FanError(f"fan document lacks {key!r}")
        try:
            dim = int(doc["dim"])
            rays = tuple(tuple(int(a) for a in r) for r in doc["rays"])
            cones = tuple(tuple(sorted(int(i) for i in c)) for c in doc["cones"])
        except (TypeError, ValueError) as exc:
            raise FanError(f"fan document has non-integer entries: {exc}") from None
        return cls(str(doc.get("name", "fan")), dim, rays, cones)

    def to_document(self) -> dict:
        return {"name": self.name, "dim": self.dim, "rays": [list(r) for r in self.rays], "cones": [list(c) for c in self.cones]}


def _det(rows: Sequence[Sequence[int]]) -> int:
    n = len(rows)
    return int(flint.fmpz_mat(n, n, [a for r in rows for a in r]).det())


def _validate(fan: Fan):
    n = fan.dim
    if n < 1:
        raise FanError("fan dimension must be positive")
    for i, r in enumerate(fan.rays):
        if len(r) != n:
            raise FanError(f"ray {i} has length {len(r)}, expected {n}")
        if not any(r):
            raise FanError(f"ray {i} is zero")
        if math.gcd(*r) != 1:
            raise FanError(f"ray {i} = {list(r)} is not primitive")
    if len(set(fan.rays)) != len(fan.rays):
        raise FanError("rays are not pairwise distinct")
    if not fan.cones:
        raise CompletenessError("fan has no maximal cones")
    used = set()
    for c in fan.cones:
        if any(i < 0 or i >= len(fan.rays) for i in c):
            raise FanError(f"cone {list(c)} refers to a missing ray")
        if len(set(c)) != n:
            raise CompletenessError(f"cone {list(c)} is not full-dimensional simplicial")
        used.update(c)
    if len(set(fan.cones)) != len(fan.cones):
        raise FanError("duplicate maximal cones")
    for c in fan.cones:
        d = _det([fan.rays[i] for i in c])
        if abs(d) != 1:
            raise SmoothnessError(c, d)
    if used != set(range(len(fan.rays))):
        missing = sorted(set(range(len(fan.rays))) - used)
        raise FanError(f"rays {missing} lie in no cone")
    facets: dict[tuple[int, ...], int] = {}
    for c in fan.cones:
        for f in itertools.combinations(c, n - 1):
            facets[f] = facets.get(f, 0) + 1
    for f, cnt in sorted(facets.items()):
        if cnt != 2:
            raise CompletenessError(f"facet {list(f)} lies on {cnt} maximal cone(s), expected 2")
    _sample_cover(fan)


def _sample_cover(fan: Fan, samples: int = 48):
    """Generic sample vectors must lie in exactly one maximal cone."""
    n = fan.dim
    inverses = []
    for c in fan.cones:
        m = flint.fmpq_mat(n, n, [fan.rays[i][j] for j in range(n) for i in c])
        inverses.append((c, m.inv()))
    rng = random.Random(20240601)
    tested = 0
    while tested < samples:
        v = [rng.randint(-97, 97) for _ in range(n)]
        if not any(v):
            continue
        vec = flint.fmpq_mat(n, 1, v)
        hits, on_wall = [], False
        for c, inv in inverses:
            coords = inv * vec
            vals = [coords[i, 0] for i in range(n)]
            if any(x == 0 for x in vals):
                if all(x >= 0 for x in vals):
                    on_wall = True
                continue
            if all(x > 0 for x in vals):
                hits.append(c)
        if on_wall:
            continue
        tested += 1
        if len(hits) != 1:
            raise CompletenessError(f"sample vector {v} lies in {len(hits)} maximal cones")


class ToricSpace:
    """A validated smooth complete fan and its derived intersection data."""

    def __init__(self, fan: Fan):
        _validate(fan)
        self.fan = fan
        self.name = fan.name
        self.dim = fan.dim

    @cached_property
    def faces(self) -> tuple[frozenset[int], ...]:
        out = set()
        for c in self.fan.cones:
            for k in range(len(c) + 1):
                for f in itertools.combinations(c, k):
                    out.add(frozenset(f))
        return tuple(sorted(out, key=lambda f: (len(f), sorted(f))))

    @cached_property
    def _face_set(self) -> frozenset[frozenset[int]]:
        return frozenset(self.faces)

    def is_face(self, rays: Iterable[int]) -> bool:
        return frozenset(rays) in self._face_set

    @cached_property
    def chow(self) -> ChowPresentation:
        n, N = self.dim, len(self.fan.rays)
        gens = tuple(f"D{i}" for i in range(N))
        rels = []
        for size in range(2, n + 2):
            for sub in itertools.combinations(range(N), size):
                if self.is_face(sub):
                    continue
                if any(not self.is_face(s) for s in itertools.combinations(sub, size - 1)):
                    continue
                e = [0] * N
                for i in sub:
                    e[i] = 1
                rels.append({tuple(e): Fraction(1)})
        for j in range(n):
            rel = {}
            for i, r in enumerate(self.fan.rays):
                if r[j]:
                    e = [0] * N
                    e[i] = 1
                    rel[tuple(e)] = Fraction(r[j])
            rels.append(rel)
        top = [0] * N
        for i in self.fan.cones[0]:
            top[i] = 1
        P = ChowPresentation(self.name, n, gens, rels, tuple(top), 1)
        total = P.one()
        for D in P.gens():
            total = total * (1 + D)
        canonical = P.zero()
        for D in P.gens():
            canonical = canonical - D
        return P.set_characteristic_data(total, canonical)

    @lru_cache(maxsize=None)
    def _dual(self, cone: tuple[int, ...]) -> tuple[tuple[Fraction, ...], ...]:
        n = self.dim
        m = flint.fmpq_mat(n, n, [self.fan.rays[i][j] for i in cone for j in range(n)])
        inv = m.inv()
        return tuple(tuple(Fraction(int(inv[j, k].p), int(inv[j, k].q)) for j in range(n)) for k in range(n))

    def intersection_number(self, divisors: Sequence[int]) -> int:
        """Intersection number of ray divisors (a multiset of ray indices)."""
        if len(divisors) != self.dim:
            raise FanError(f"need {self.dim} divisors, got {len(divisors)}")
        return int(self._intersect(tuple(sorted(divisors))))

    @lru_cache(maxsize=None)
    def _intersect(self, divisors: tuple[int, ...]) -> Fraction:
        support = sorted(set(divisors))
        if not self.is_face(support):
            return Fraction(0)
        if len(support) == self.dim:
            return Fraction(1)
        rho = next(i for i in support if divisors.count(i) > 1)
        cone = next(c for c in self.fan.cones if set(support) <= set(c))
        m = self._dual(cone)[cone.index(rho)]
        rest = list(divisors)
        rest.remove(rho)
        total = Fraction(0)
        for tau, v in enumerate(self.fan.rays):
            if tau in cone:
                continue
            pairing = sum(a * b for a, b in zip(m, v))
            if pairing:
                total -= pairing * self._intersect(tuple(sorted(rest + [tau])))
        return total

    def point_count(self, q: int) -> int:
        if q < 2:
            raise ValueError("q must be a prime power >= 2")
        return sum((q - 1) ** (self.dim - len(f)) for f in self.faces)

    def e_polynomial(self) -> tuple[int, ...]:
        """Coefficients of the E-polynomial in ``uv`` (index = power of uv)."""
        coeffs = [0] * (self.dim + 1)
        for f in self.faces:
            k = self.dim - len(f)
            for j in range(k + 1):
                coeffs[j] += math.comb(k, j) * (-1) ** (k - j)
        return tuple(coeffs)

    def __repr__(self):
        return f"ToricSpace({self.name!r}, dim={self.dim}, rays={len(self.fan.rays)}, cones={len(self.fan.cones)})"


def build_toric(fan: Fan | Mapping) -> ToricSpace:
    if not isinstance(fan, Fan):
        fan = Fan.from_document(fan)
    return ToricSpace(fan)


def intersection_number(space: ToricSpace, divisors: Sequence[int]) -> int:
    return space.intersection_number(divisors)


def point_count(space: ToricSpace, q: int) -> int:
    return space.point_count(q)


def e_polynomial(space: ToricSpace) -> tuple[int, ...]:
    return space.e_polynomial()


def evaluate_uv(coeffs: Sequence[int], value) -> int:
    return sum(c * value**i for i, c in enumerate(coeffs))


# -- shipped data --------------------------------------------------------------


@lru_cache(maxsize=None)
def _data() -> dict:
    text = resources.files("kequiv").joinpath("data/fans.json").read_text()
    return json.loads(text)


def fan_names() -> list[str]:
    return [f["name"] for f in _data()["fans"]]


@lru_cache(maxsize=None)
def gallery_fan(name: str) -> ToricSpace:
    key = canonical_name(name)
    for doc in _data()["fans"]:
        if doc["name"] == key:
            return build_toric(doc)
    raise RegistryError(f"no shipped fan named {name!r}")


def flop_pair_names() -> list[str]:
    return [p["name"] for p in _data()["flop_pairs"]]


@dataclass(frozen=True)
class FlopDescriptor:
    name: str
    removed: tuple[tuple[int, ...], ...]
    added: tuple[tuple[int, ...], ...]
    square: tuple[int, ...]
    k_equivalent: bool = True

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "cones_only_in_a": [list(c) for c in self.removed],
            "cones_only_in_b": [list(c) for c in self.added],
            "square_rays": list(self.square),
            "k_equivalent": self.k_equivalent,
        }


def flop_descriptor(name: str, rays, cones_a, cones_b) -> FlopDescriptor:
    a = {tuple(sorted(c)) for c in cones_a}
    b = {tuple(sorted(c)) for c in cones_b}
    removed, added = sorted(a - b), sorted(b - a)
    if not removed and not added:
        raise FlopError(f"{name}: identical triangulations, not a flop")
    sq_a = set().union(*map(set, removed))
    sq_b = set().union(*map(set, added))
    if sq_a != sq_b:
        raise FlopError(f"{name}: retriangulated regions use different rays")
    if len(removed) != 2 or len(added) != 2 or len(sq_a) != 4:
        raise FlopError(f"{name}: change is not a single square retriangulation")
    shared_a = set(removed[0]) & set(removed[1])
    shared_b = set(added[0]) & set(added[1])
    if len(shared_a) != 2 or len(shared_b) != 2 or shared_a & shared_b:
        raise FlopError(f"{name}: diagonals of the square do not swap")
    # the four rays must satisfy v_a + v_b = v_c + v_d across the two diagonals
    i, j = sorted(shared_a)
    k, l = sorted(shared_b)
    va = [x + y for x, y in zip(rays[i], rays[j])]
    vb = [x + y for x, y in zip(rays[k], rays[l])]
    if va != vb:
        raise FlopError(f"{name}: square is not a classical flop (diagonal sums differ)")
    return FlopDescriptor(name, tuple(removed), tuple(added), tuple(sorted(sq_a)))


def flop_pair_from_document(doc: Mapping) -> tuple[ToricSpace, ToricSpace, FlopDescriptor]:
    name = str(doc.get("name", "pair"))
    for key in ("rays", "cones_a", "cones_b"):
        if key not in doc:
            raise FanError(f"flop document lacks {key!r}")
    dim = len(doc["rays"][0])
    X = build_toric({"name": f"{name}/A", "dim": dim, "rays": doc["rays"], "cones": doc["cones_a"]})
    Xp = build_toric({"name": f"{name}/B", "dim": dim, "rays": doc["rays"], "cones": doc["cones_b"]})
    desc = flop_descriptor(name, X.fan.rays, X.fan.cones, Xp.fan.cones)
    return X, Xp, desc


@lru_cache(maxsize=None)
def flop_pair(name: str) -> tuple[ToricSpace, ToricSpace, FlopDescriptor]:
    for doc in _data()["flop_pairs"]:
        if doc["name"] == name:
            return flop_pair_from_document(doc)
    raise RegistryError(f"no flop pair named {name!r}")
