"""Finite graded presentations of Chow rings for a small curated gallery.

A presentation is a quotient of a polynomial ring in divisor classes by a
homogeneous ideal, reduced in each degree to a fixed monomial basis by exact
linear algebra.  Classes carry coefficients of any exact ring type that mixes
with :class:`fractions.Fraction` (plain rationals, or truncated series when a
genus integrand is being assembled).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import flint

Monomial = tuple[int, ...]


class PresentationError(ValueError):
    pass


class RegistryError(KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown registry entry"


def monomials(nvars: int, degree: int) -> list[Monomial]:
    out = []
    for combo in itertools.combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _is_zero(c) -> bool:
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero()


class ChowPresentation:
    """Graded ring ``Q[D_1..D_g] / I`` of dimension ``n`` with integration.

    ``relations`` are homogeneous polynomials (maps monomial -> rational).  The
    degree functional is pinned by ``top_monomial`` integrating to
    ``top_value``.  ``chern`` and ``canonical`` are filled in after construction
    because they are classes in the ring itself.
    """

    def __init__(
        self,
        name: str,
        dim: int,
        generators: Sequence[str],
        relations: Sequence[Mapping[Monomial, Fraction]],
        top_monomial: Monomial,
        top_value: int | Fraction = 1,
    ):
        self.name = name
        self.dim = dim
        self.generators = tuple(generators)
        g = len(self.generators)
        self._relations = [dict(r) for r in relations]
        basis: list[Monomial] = []
        normal: dict[Monomial, dict[int, Fraction]] = {}
        for d in range(dim + 1):
            monos = sorted(monomials(g, d), key=lambda m: tuple(reversed(m)), reverse=True)
            col = {m: i for i, m in enumerate(monos)}
            rows = []
            for rel in self._relations:
                rdeg = _rel_degree(rel)
                if rdeg > d:
                    continue
                for m in monomials(g, d - rdeg):
                    row = [Fraction(0)] * len(monos)
                    for mono, c in rel.items():
                        row[col[_mono_mul(m, mono)]] += Fraction(c)
                    if any(row):
                        rows.append(row)
            pivots, reduced = _rref(rows, len(monos))
            free = [j for j in range(len(monos)) if j not in pivots]
            start = len(basis)
            basis.extend(monos[j] for j in free)
            index = {j: start + i for i, j in enumerate(free)}
            for j in free:
                normal[monos[j]] = {index[j]: Fraction(1)}
            for row_i, pj in enumerate(pivots):
                row = reduced[row_i]
                nf = {}
                for j in free:
                    if row[j]:
                        nf[index[j]] = -row[j]
                normal[monos[pj]] = nf
        self.basis: tuple[Monomial, ...] = tuple(basis)
        self.degrees = tuple(sum(m) for m in basis)
        self._normal = normal
        top = [i for i, d in enumerate(self.degrees) if d == dim]
        if len(top) != 1:
            raise PresentationError(f"{name}: top graded piece has rank {len(top)}, expected 1")
        self._top = top[0]
        nf = normal.get(tuple(top_monomial))
        if nf is None or not nf:
            raise PresentationError(f"{name}: normalizing monomial is zero in the ring")
        self._top_value = Fraction(top_value) / nf[self._top]
        self._table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i, a in enumerate(self.basis):
            for j, b in enumerate(self.basis):
                if j < i:
                    continue
                prod = _mono_mul(a, b)
                if sum(prod) > dim:
                    continue
                self._table[(i, j)] = normal[prod]
        self.chern: tuple[ChowClass, ...] = ()
        self.canonical: ChowClass | None = None

    # -- element construction ----------------------------------------------

    def zero(self) -> "ChowClass":
        return ChowClass(self, {})

    def one(self) -> "ChowClass":
        return self.monomial((0,) * len(self.generators))

    def gen(self, name: str) -> "ChowClass":
        try:
            i = self.generators.index(name)
        except ValueError:
            raise PresentationError(f"{self.name}: no generator {name!r}") from None
        e = [0] * len(self.generators)
        e[i] = 1
        return self.monomial(tuple(e))

    def gens(self) -> tuple["ChowClass", ...]:
        return tuple(self.gen(g) for g in self.generators)

    def monomial(self, mono: Monomial, coeff=1) -> "ChowClass":
        mono = tuple(mono)
        if len(mono) != len(self.generators) or any(a < 0 for a in mono):
            raise PresentationError(f"{self.name}: bad monomial {mono}")
        if sum(mono) > self.dim:
            return self.zero()
        return ChowClass(self, {i: coeff * c for i, c in self._normal[mono].items()})

    def polynomial(self, poly: Mapping[Monomial, object]) -> "ChowClass":
        out = self.zero()
        for m, c in poly.items():
            out = out + self.monomial(m, c)
        return out

    def normal_form(self, mono: Monomial) -> dict[Monomial, Fraction]:
        """Rewrite rule for a monomial, as a combination of basis monomials."""
        if sum(mono) > self.dim:
            return {}
        return {self.basis[i]: c for i, c in self._normal[tuple(mono)].items()}

    def set_characteristic_data(self, chern_total: "ChowClass", canonical: "ChowClass | None" = None):
        self.chern = tuple(chern_total.degree_part(d) for d in range(self.dim + 1))
        self.canonical = -self.chern[1] if canonical is None else canonical
        return self

    # -- integration ---------------------------------------------------------

    def integrate(self, cls: "ChowClass"):
        """Degree functional; classes of lower degree integrate to 0."""
        if cls.space is not self:
            raise PresentationError("class belongs to a different presentation")
        c = cls.coeffs.get(self._top, 0)
        if isinstance(c, int) or isinstance(c, Fraction):
            return Fraction(c) * self._top_value
        return c * self._top_value

    def integral_table(self, generator_images: Sequence["ChowClass"] | None = None) -> dict[Monomial, Fraction]:
        """``integral(m)`` for every top-degree monomial ``m`` in the generators,
        optionally after substituting each generator by a class."""
        images = generator_images or self.gens()
        out = {}
        for m in monomials(len(images), self.dim):
            cls = self.one()
            for g, a in zip(images, m):
                for _ in range(a):
                    cls = cls * g
            out[m] = self.integrate(cls)
        return out

    def pairing_matrix(self, d: int) -> list[list[Fraction]]:
        low = [i for i, x in enumerate(self.degrees) if x == d]
        high = [i for i, x in enumerate(self.degrees) if x == self.dim - d]
        mat = []
        for i in low:
            row = []
            for j in high:
                a = ChowClass(self, {i: 1})
                b = ChowClass(self, {j: 1})
                row.append(self.integrate(a * b))
            mat.append(row)
        return mat

    def poincare_nondegenerate(self) -> bool:
        for d in range(self.dim + 1):
            mat = self.pairing_matrix(d)
            if not mat:
                continue
            if len(mat) != len(mat[0]):
                return False
            m = flint.fmpq_mat(len(mat), len(mat), [flint.fmpq(x.numerator, x.denominator) for r in mat for x in r])
            if m.det() == 0:
                return False
        return True

    def betti(self) -> list[int]:
        return [sum(1 for x in self.degrees if x == d) for d in range(self.dim + 1)]

    # -- documents -----------------------------------------------------------

    def to_document(self) -> dict:
        def mono_key(m):
            return "*".join(f"{g}^{a}" if a > 1 else g for g, a in zip(self.generators, m) if a) or "1"

        rules = {}
        for m in sorted(self._normal):
            nf = self._normal[m]
            if nf == {self.basis.index(m): 1} if m in self.basis else False:
                continue
            rules[mono_key(m)] = {mono_key(self.basis[i]): str(c) for i, c in sorted(nf.items())}
        return {
            "name": self.name,
            "dim": self.dim,
            "generators": list(self.generators),
            "basis": [mono_key(m) for m in self.basis],
            "rewrite_rules": rules,
            "degree": {mono_key(self.basis[self._top]): str(self._top_value)},
            "chern": [c.to_document() for c in self.chern],
            "canonical": self.canonical.to_document() if self.canonical is not None else None,
        }

    def __repr__(self):
        return f"ChowPresentation({self.name!r}, dim={self.dim}, generators={self.generators})"


def _rel_degree(rel: Mapping[Monomial, Fraction]) -> int:
    degs = {sum(m) for m, c in rel.items() if c}
    if len(degs) != 1:
        raise PresentationError(f"relation is not homogeneous: {rel}")
    return degs.pop()


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[int], list[list[Fraction]]]:
    """Reduced row echelon form; returns (pivot columns, nonzero rows)."""
    if not rows:
        return [], []
    mat = flint.fmpq_mat(len(rows), ncols, [flint.fmpq(x.numerator, x.denominator) for r in rows for x in r])
    red, rank = mat.rref()
    out, pivots = [], []
    for i in range(rank):
        row = [Fraction(int(red[i, j].p), int(red[i, j].q)) for j in range(ncols)]
        pivots.append(next(j for j, x in enumerate(row) if x))
        out.append(row)
    return pivots, out


class ChowClass:
    """Element of a presentation: basis index -> coefficient (sparse)."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: ChowPresentation, coeffs: Mapping[int, object]):
        self.space = space
        self.coeffs = {i: c for i, c in coeffs.items() if not _is_zero(c)}

    def _other(self, other) -> "ChowClass":
        if isinstance(other, ChowClass):
            if other.space is not self.space:
                raise PresentationError("classes live in different presentations")
            return other
        return self.space.one() * other

    def __add__(self, other):
        other = self._other(other)
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out[i] + c if i in out else c
        return ChowClass(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return ChowClass(self.space, {i: -c for i, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, ChowClass):
            return ChowClass(self.space, {i: c * other for i, c in self.coeffs.items()})
        other = self._other(other)
        table = self.space._table
        out: dict = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                key = (i, j) if i <= j else (j, i)
                entries = table.get(key)
                if not entries:
                    continue
                ab = a * b
                for k, s in entries.items():
                    term = ab * s
                    out[k] = out[k] + term if k in out else term
        return ChowClass(self.space, out)

    def __rmul__(self, other):
        if isinstance(other, ChowClass):
            return other.__mul__(self)
        return ChowClass(self.space, {i: other * c for i, c in self.coeffs.items()})

    def __pow__(self, n: int):
        out = self.space.one()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, (ChowClass, int, Fraction)):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def is_zero(self) -> bool:
        return not self.coeffs

    def degree_part(self, d: int) -> "ChowClass":
        return ChowClass(self.space, {i: c for i, c in self.coeffs.items() if self.space.degrees[i] == d})

    def constant(self):
        return self.coeffs.get(self.space.basis.index((0,) * len(self.space.generators)), 0)

    def map_coeffs(self, fn: Callable) -> "ChowClass":
        return ChowClass(self.space, {i: fn(c) for i, c in self.coeffs.items()})

    def integrate(self):
        return self.space.integrate(self)

    def to_document(self) -> dict:
        def key(m):
            return "*".join(f"{g}^{a}" if a > 1 else g for g, a in zip(self.space.generators, m) if a) or "1"

        return {key(self.space.basis[i]): str(c) for i, c in sorted(self.coeffs.items())}

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for i, c in sorted(self.coeffs.items()):
            m = self.space.basis[i]
            mono = "*".join(f"{g}^{a}" if a > 1 else g for g, a in zip(self.space.generators, m) if a)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def power_sums(space: ChowPresentation) -> list[ChowClass]:
    """Power sums ``p_j = sum x_i^j`` of the Chern roots, by Newton's identities."""
    c = space.chern
    n = space.dim
    p = [space.one() * n]
    for j in range(1, n + 1):
        acc = space.zero()
        for i in range(1, j):
            term = c[i] * p[j - i]
            acc = acc + term if i % 2 == 1 else acc - term
        last = c[j] * j
        acc = acc + last if j % 2 == 1 else acc - last
        p.append(acc)
    return p


def exp_nilpotent(cls: ChowClass) -> ChowClass:
    """``exp`` of a class; the positive-degree part is nilpotent, the degree-0
    part must vanish."""
    if not _is_zero(cls.constant()):
        raise PresentationError("exp needs a class without degree-0 part")
    out = cls.space.one()
    term = cls.space.one()
    for j in range(1, cls.space.dim + 1):
        term = term * cls * Fraction(1, j)
        out = out + term
    return out


@dataclass
class BlowupDatum:
    """Blow-up ``phi: Y -> X`` along a smooth center ``Z`` of codimension ``r``."""

    name: str
    source: ChowPresentation
    target: ChowPresentation
    center: ChowPresentation
    codim: int
    pullback_images: dict[str, ChowClass]
    exceptional: list[ChowClass]
    discrepancies: list[int]
    normal_roots: list[ChowClass]
    extra: dict = field(default_factory=dict)

    def pullback(self, cls: ChowClass) -> ChowClass:
        if cls.space is not self.target:
            raise PresentationError("pullback needs a class on the target")
        images = [self.pullback_images[g] for g in self.target.generators]
        out = self.source.zero()
        for i, c in cls.coeffs.items():
            term = self.source.one()
            for img, a in zip(images, self.target.basis[i]):
                for _ in range(a):
                    term = term * img
            out = out + term * c
        return out

    def canonical_discrepancy_holds(self) -> bool:
        lhs = self.source.canonical - self.pullback(self.target.canonical)
        rhs = self.source.zero()
        for e, E in zip(self.discrepancies, self.exceptional):
            rhs = rhs + E * e
        return lhs == rhs

    def pullback_is_ring_map(self) -> bool:
        """Multiplicativity and the projection formula on all basis pairs/top classes."""
        X = self.target
        for i, a in enumerate(X.basis):
            for j, b in enumerate(X.basis):
                A = ChowClass(X, {i: 1})
                B = ChowClass(X, {j: 1})
                if self.pullback(A * B) != self.pullback(A) * self.pullback(B):
                    return False
        for i, d in enumerate(X.degrees):
            if d == X.dim:
                cls = ChowClass(X, {i: 1})
                if self.source.integrate(self.pullback(cls)) != X.integrate(cls):
                    return False
        return True

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "source": self.source.name,
            "target": self.target.name,
            "center": self.center.name,
            "codim": self.codim,
            "pullback": {g: c.to_document() for g, c in self.pullback_images.items()},
            "exceptional": [E.to_document() for E in self.exceptional],
            "discrepancies": list(self.discrepancies),
            "normal_roots": [n.to_document() for n in self.normal_roots],
        }


# -- gallery -------------------------------------------------------------------

_SUPERSCRIPTS = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹", "0123456789")


def canonical_name(name: str) -> str:
    """Normalize spellings such as ``"Bl_pt P²"``, ``"P^1 x P^1"`` or ``"p3"``."""
    s = name.translate(_SUPERSCRIPTS).replace("×", "x").replace("^", "")
    s = re.sub(r"\s+", " ", s.strip())
    s = re.sub(r"\s*x\s*", "x", s)
    s = re.sub(r"\bp(\d)", r"P\1", s)
    s = re.sub(r"(?i)^bl[_ ]?(pt|line)\s*", lambda m: f"Bl_{m.group(1).lower()} ", s)
    if s.lower() in ("pt", "point", "p0"):
        return "pt"
    return s


def _mono(gens: Sequence[str], **exps: int) -> Monomial:
    return tuple(exps.get(g, 0) for g in gens)


def _rel(gens: Sequence[str], *terms: tuple[int, dict]) -> dict:
    out: dict = {}
    for c, e in terms:
        m = _mono(gens, **e)
        out[m] = out.get(m, 0) + Fraction(c)
    return out


def projective_space(n: int) -> ChowPresentation:
    if n == 0:
        return point()
    gens = ("h",)
    P = ChowPresentation(f"P{n}", n, gens, [_rel(gens, (1, {"h": n + 1}))], (n,), 1)
    h = P.gen("h")
    P.set_characteristic_data((1 + h) ** (n + 1), h * -(n + 1))
    return P


def point() -> ChowPresentation:
    P = ChowPresentation("pt", 0, (), [], (), 1)
    P.set_characteristic_data(P.one(), P.zero())
    return P


def product_of_lines(m: int) -> ChowPresentation:
    gens = tuple("abc"[:m])
    rels = [_rel(gens, (1, {g: 2})) for g in gens]
    P = ChowPresentation("x".join(["P1"] * m), m, gens, rels, (1,) * m, 1)
    total = P.one()
    for g in P.gens():
        total = total * (1 + 2 * g)
    P.set_characteristic_data(total)
    return P


def blowup_point_p2() -> BlowupDatum:
    gens = ("H", "E")
    rels = [
        _rel(gens, (1, {"H": 1, "E": 1})),
        _rel(gens, (1, {"E": 2}), (1, {"H": 2})),
    ]
    Y = ChowPresentation("Bl_pt P2", 2, gens, rels, _mono(gens, H=2), 1)
    H, E = Y.gens()
    Y.set_characteristic_data(1 + (3 * H - E) + 4 * H * H, -3 * H + E)
    X = projective_space(2)
    Z = point()
    return BlowupDatum("Bl_pt P2", Y, X, Z, 2, {"h": H}, [E], [1], [Z.zero(), Z.zero()])


def blowup_point_p3() -> BlowupDatum:
    gens = ("H", "E")
    rels = [
        _rel(gens, (1, {"H": 1, "E": 1})),
        _rel(gens, (1, {"E": 3}), (-1, {"H": 3})),
    ]
    Y = ChowPresentation("Bl_pt P3", 3, gens, rels, _mono(gens, H=3), 1)
    H, E = Y.gens()
    Y.set_characteristic_data(1 + (4 * H - 2 * E) + 6 * H * H + 6 * H**3, -4 * H + 2 * E)
    X = projective_space(3)
    Z = point()
    return BlowupDatum("Bl_pt P3", Y, X, Z, 3, {"h": H}, [E], [2], [Z.zero()] * 3)


def blowup_line_p3() -> BlowupDatum:
    gens = ("H", "E")
    rels = [
        _rel(gens, (1, {"E": 2}), (1, {"H": 2}), (-2, {"H": 1, "E": 1})),
        _rel(gens, (1, {"H": 2, "E": 1})),
        _rel(gens, (1, {"H": 4})),
    ]
    Y = ChowPresentation("Bl_line P3", 3, gens, rels, _mono(gens, H=3), 1)
    H, E = Y.gens()
    Y.set_characteristic_data(1 + (4 * H - E) + (7 * H * H - 4 * H * E) + 6 * H**3, -4 * H + E)
    X = projective_space(3)
    Z = projective_space(1)
    Z.name = "P1"
    ell = Z.gen("h")
    return BlowupDatum("Bl_line P3", Y, X, Z, 2, {"h": H}, [E], [1], [ell, ell])


_SPACES: dict[str, Callable[[], ChowPresentation]] = {
    "pt": point,
    "P1": lambda: projective_space(1),
    "P2": lambda: projective_space(2),
    "P3": lambda: projective_space(3),
    "P4": lambda: projective_space(4),
    "P1xP1": lambda: product_of_lines(2),
    "P1xP1xP1": lambda: product_of_lines(3),
}

_BLOWUPS: dict[str, Callable[[], BlowupDatum]] = {
    "Bl_pt P2": blowup_point_p2,
    "Bl_pt P3": blowup_point_p3,
    "Bl_line P3": blowup_line_p3,
}

# Hand-coded generators written in the ray divisors of the shipped fans.
TORIC_GENERATORS: dict[str, dict[str, dict[int, int]]] = {
    "P1": {"h": {0: 1}},
    "P2": {"h": {0: 1}},
    "P3": {"h": {0: 1}},
    "P4": {"h": {0: 1}},
    "P1xP1": {"a": {0: 1}, "b": {1: 1}},
    "P1xP1xP1": {"a": {0: 1}, "b": {1: 1}, "c": {2: 1}},
    "Bl_pt P2": {"H": {2: 1}, "E": {3: 1}},
    "Bl_pt P3": {"H": {3: 1}, "E": {4: 1}},
    "Bl_line P3": {"H": {3: 1}, "E": {4: 1}},
}


def gallery_names() -> list[str]:
    from . import toric

    names = list(_SPACES) + list(_BLOWUPS)
    for pair in toric.flop_pair_names():
        names += [f"{pair}/A", f"{pair}/B"]
    return names


def gallery(name: str) -> ChowPresentation | BlowupDatum:
    """Look up a gallery entry.  Blow-ups return their :class:`BlowupDatum`."""
    key = canonical_name(name)
    if key in _SPACES:
        return _SPACES[key]()
    if key in _BLOWUPS:
        return _BLOWUPS[key]()
    if "/" in key:
        from . import toric

        pair, side = key.rsplit("/", 1)
        try:
            X, Xp, _ = toric.flop_pair(pair)
        except RegistryError:
            pass
        else:
            if side in ("A", "B"):
                return (X if side == "A" else Xp).chow
    raise RegistryError(f"unknown gallery entry {name!r}")


def space(name: str) -> ChowPresentation:
    entry = gallery(name)
    return entry.source if isinstance(entry, BlowupDatum) else entry


def integrate(space: ChowPresentation, cls: ChowClass):
    return space.integrate(cls)
