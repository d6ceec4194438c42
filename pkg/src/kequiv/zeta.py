"""Point counts over finite fields, truncated zeta functions, and Padé-style
reconstruction of their rational form.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping, Sequence

import flint
import numpy as np

from . import toric
from .arcs import Expression, _JetAlgebra, _MpolyAlgebra
from .chow import RegistryError
from .exactalg import CoeffRing, Series, series_exp
from .fields import FieldError, factor_prime_power, field

DEFAULT_BUDGET = 20_000_000
BLOCK = 1 << 18


class ZetaError(ValueError):
    pass


class CountBudgetError(ZetaError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"brute-force count needs {required} points, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class AffineSpace:
    dim: int

    @property
    def name(self) -> str:
        return "point" if self.dim == 0 else f"A{self.dim}"


@dataclass(frozen=True)
class Hypersurface:
    """Zero locus of one integer polynomial, affine or projective."""

    name: str
    vars: tuple[str, ...]
    equation: str
    projective: bool = False

    def __post_init__(self):
        expr = Expression(self.equation, self.vars)
        if expr.laurent:
            raise ZetaError(f"{self.name}: equation must be polynomial")
        if self.projective:
            ctx = flint.fmpz_mpoly_ctx.get(self.vars, "lex")
            poly = expr.evaluate(ctx.gens(), _MpolyAlgebra(ctx))
            if len({sum(m) for m in poly.monoms()}) > 1:
                raise ZetaError(f"{self.name}: projective equation must be homogeneous")

    @property
    def dim(self) -> int:
        return len(self.vars) - (2 if self.projective else 1)

    @classmethod
    def from_document(cls, doc: Mapping) -> "Hypersurface":
        try:
            return cls(str(doc["name"]), tuple(doc["vars"]), str(doc["equation"]), bool(doc.get("projective", False)))
        except KeyError as exc:
            raise ZetaError(f"hypersurface document is missing {exc.args[0]!r}") from None

    def to_document(self) -> dict:
        return {"name": self.name, "vars": list(self.vars), "equation": self.equation, "projective": self.projective}


HYPERSURFACES = {
    "quadric-P3": Hypersurface("quadric-P3", ("x", "y", "z", "w"), "x*y - z*w", True),
    "conic-P2": Hypersurface("conic-P2", ("x", "y", "z"), "x*y - z^2", True),
    "node-A2": Hypersurface("node-A2", ("x", "y"), "x*y", False),
}


def resolve_space(space):
    """Accept a space object or a registered name."""
    if isinstance(space, (toric.ToricSpace, Hypersurface, AffineSpace)):
        return space
    if not isinstance(space, str):
        raise ZetaError(f"unsupported space {space!r}")
    if space in HYPERSURFACES:
        return HYPERSURFACES[space]
    if space == "point":
        return AffineSpace(0)
    if space.startswith("A") and space[1:].isdigit():
        return AffineSpace(int(space[1:]))
    if "/" in space:
        pair, side = space.rsplit("/", 1)
        if pair in toric.flop_pair_names() and side in ("A", "B"):
            a, b, _ = toric.flop_pair(pair)
            return a if side == "A" else b
    try:
        return toric.gallery_fan(space)
    except RegistryError:
        raise ZetaError(f"unknown space {space!r}") from None


def space_name(space) -> str:
    return getattr(space, "name", str(space))


def _check_q(q: int):
    try:
        factor_prime_power(q)
    except FieldError as exc:
        raise ZetaError(str(exc)) from None


def _hypersurface_count(h: Hypersurface, q: int, budget: int) -> int:
    F = field(q)
    n = len(h.vars)
    total = q**n
    if total > budget:
        raise CountBudgetError(total, budget)
    expr = Expression(h.equation, h.vars)
    zeros = 0
    for start in range(0, total, BLOCK):
        idx = np.arange(start, min(total, start + BLOCK), dtype=np.int64)
        env = []
        for _ in range(n):
            env.append((idx % q)[:, None])
            idx = idx // q
        val = expr.evaluate(env, _JetAlgebra(F, 0, env[0].shape[0]))
        zeros += int((val[:, 0] == 0).sum())
    if h.projective:
        return (zeros - 1) // (q - 1)
    return zeros


def count_points(space, q: int, budget: int = DEFAULT_BUDGET) -> int:
    """``|X(GF(q))|``: cone formula for toric spaces, enumeration for hypersurfaces."""
    _check_q(q)
    space = resolve_space(space)
    if isinstance(space, toric.ToricSpace):
        return space.point_count(q)
    if isinstance(space, AffineSpace):
        return q**space.dim
    return _hypersurface_count(space, q, budget)


def weil_measure(space, q: int, budget: int = DEFAULT_BUDGET) -> Fraction:
    space = resolve_space(space)
    return Fraction(count_points(space, q, budget), q**space.dim)


@dataclass(frozen=True)
class CountTable:
    space: str
    q: int
    counts: tuple[int, ...]

    @property
    def R(self) -> int:
        return len(self.counts)

    def to_document(self) -> dict:
        return {"space": self.space, "q": self.q, "counts": list(self.counts)}


def count_table(space, q: int, R: int, budget: int = DEFAULT_BUDGET) -> CountTable:
    """``N_r = |X(GF(q^r))|`` for ``r = 1..R``."""
    space = resolve_space(space)
    counts = tuple(count_points(space, q**r, budget) for r in range(1, R + 1))
    if isinstance(space, toric.ToricSpace):
        e = space.e_polynomial()
        for r, n in enumerate(counts, 1):
            if n != toric.evaluate_uv(e, q**r):
                raise ZetaError(f"{space.name}: cone count {n} disagrees with the E-polynomial at q^{r}")
    return CountTable(space_name(space), q, counts)


@dataclass
class RationalForm:
    """``numerator(t) / denominator(t)`` with ``denominator(0) = 1``."""

    numerator: tuple[Fraction, ...]
    denominator: tuple[Fraction, ...]
    betti: dict = dc_field(default_factory=dict)
    residual: tuple[Fraction, ...] = (Fraction(1),)

    def expand(self, R: int) -> list[Fraction]:
        num = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in self.numerator])
        den = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in self.denominator])
        inv = [Fraction(0)] * (R + 1)
        d = [Fraction(int(c.p), int(c.q)) for c in den.coeffs()] + [Fraction(0)] * (R + 1)
        inv[0] = 1 / d[0]
        for k in range(1, R + 1):
            inv[k] = -sum(d[i] * inv[k - i] for i in range(1, k + 1)) / d[0]
        n = [Fraction(int(c.p), int(c.q)) for c in num.coeffs()]
        return [sum(n[i] * inv[k - i] for i in range(min(k, len(n) - 1) + 1)) if n else Fraction(0) for k in range(R + 1)]

    def to_document(self) -> dict:
        return {
            "numerator": [str(c) for c in self.numerator],
            "denominator": [str(c) for c in self.denominator],
            "betti": {f"b{2 * i}": m for i, m in sorted(self.betti.items())},
            "residual": [str(c) for c in self.residual],
        }

    def __str__(self):
        return f"({_fmt(self.numerator)}) / ({_fmt(self.denominator)})"


def _fmt(coeffs: Sequence[Fraction]) -> str:
    parts = []
    for i, c in enumerate(coeffs):
        if c:
            parts.append(str(c) if i == 0 else f"{c}*t^{i}" if i > 1 else f"{c}*t")
    return " + ".join(parts) or "0"


@dataclass
class ZetaSeries:
    q: int
    table: CountTable
    series: Series
    rational: RationalForm | None = None

    @property
    def R(self) -> int:
        return self.table.R

    def coefficients(self) -> list[Fraction]:
        return [self.series.coefficient({"t": j}).to_fraction() for j in range(self.R + 1)]

    def to_document(self) -> dict:
        return {
            "q": self.q,
            "table": self.table.to_document(),
            "coefficients": [str(c) for c in self.coefficients()],
            "rational": None if self.rational is None else self.rational.to_document(),
        }


def zeta_series(table: CountTable) -> ZetaSeries:
    """``exp(sum_r N_r t^r / r)`` truncated after ``t^R``."""
    if table.R < 1:
        raise ZetaError("zeta series needs at least one count")
    ring = CoeffRing().series_ring({"t": table.R})
    log = ring.from_coefficients("t", [0] + [Fraction(n, r) for r, n in enumerate(table.counts, 1)])
    return ZetaSeries(table.q, table, series_exp(log))


@dataclass
class ReconstructionFailure:
    reason: str
    R: int
    bounds: tuple[int, int]
    deficit: int

    def to_document(self) -> dict:
        return {"reason": self.reason, "R": self.R, "bounds": list(self.bounds), "deficit": self.deficit}


class ReconstructionError(ZetaError):
    def __init__(self, failure: ReconstructionFailure):
        super().__init__(failure.reason)
        self.failure = failure


def _pade(c: Sequence[Fraction], a: int, b: int) -> tuple[list[Fraction], list[Fraction]] | None:
    """Solve ``Q * Z = P mod t^(R+1)`` with ``deg P <= a``, ``deg Q <= b``, ``Q(0) = 1``."""
    R = len(c) - 1
    rows = list(range(a + 1, R + 1))
    Q = [Fraction(1)] + [Fraction(0)] * b
    if b:
        A = flint.fmpq_mat(len(rows), b, [flint.fmpq(c[j - i].numerator, c[j - i].denominator) if j - i >= 0 else 0 for j in rows for i in range(1, b + 1)])
        rhs = flint.fmpq_mat(len(rows), 1, [flint.fmpq(-c[j].numerator, c[j].denominator) for j in rows])
        aug = flint.fmpq_mat(len(rows), b + 1, [A[r, s] if s < b else rhs[r, 0] for r in range(len(rows)) for s in range(b + 1)])
        rref, rank = aug.rref()
        if rank != A.rref()[1]:
            return None
        if rank < b:
            return None
        for r in range(rank):
            lead = next(s for s in range(b + 1) if rref[r, s] != 0)
            Q[lead + 1] = Fraction(int(rref[r, b].p), int(rref[r, b].q))
    elif any(c[j] for j in rows):
        return None
    P = [sum(Q[i] * c[j - i] for i in range(min(j, b) + 1)) for j in range(a + 1)]
    while P and P[-1] == 0:
        P.pop()
    while len(Q) > 1 and Q[-1] == 0:
        Q.pop()
    return P or [Fraction(0)], Q


def _factor_betti(den: Sequence[Fraction], q: int, top: int) -> tuple[dict, tuple[Fraction, ...]]:
    poly = flint.fmpq_poly([flint.fmpq(c.numerator, c.denominator) for c in den])
    betti = {}
    for i in range(top + 1):
        f = flint.fmpq_poly([1, -(q**i)])
        while poly.degree() > 0:
            quo, rem = divmod(poly, f)
            if rem != 0:
                break
            poly = quo
            betti[i] = betti.get(i, 0) + 1
    return betti, tuple(Fraction(int(c.p), int(c.q)) for c in poly.coeffs())


def rational_reconstruct(z: ZetaSeries, bounds: tuple[int, int] | None = None, cap: int = 12, dim: int | None = None) -> RationalForm:
    """Smallest ``P/Q`` (by ``deg P + deg Q``) matching the truncated series.

    Default bounds are ``(n, n + 1)`` for a space of dimension ``n``; they are
    grown by one at a time up to ``cap`` while the series length allows.
    Denominator factors ``1 - q^i t`` are reported as Betti multiplicities
    ``b_{2i}``.
    """
    c = z.coefficients()
    R = z.R
    n = dim if dim is not None else 1
    a0, b0 = bounds if bounds is not None else (n, n + 1)
    a_max, b_max = a0, b0
    while True:
        for s in range(min(a_max + b_max, R - 1) + 1):
            for b in range(min(s, b_max), -1, -1):
                a = s - b
                if a > a_max:
                    continue
                found = _pade(c, a, b)
                if found is None:
                    continue
                P, Q = found
                betti, residual = _factor_betti(Q, z.q, len(Q) - 1)
                form = RationalForm(tuple(P), tuple(Q), betti, residual)
                if form.expand(R) != c:
                    raise ZetaError("reconstruction does not round-trip")
                z.rational = form
                return form
        if max(a_max, b_max) >= cap:
            break
        a_max, b_max = a_max + 1, b_max + 1
    deficit = max(a0 + b0 + 1 - R, 0)
    reason = f"no rational function with degrees <= {(a_max, b_max)} fits {R} coefficients"
    if deficit:
        reason += f"; the series is {deficit} terms short of the {(a0, b0)} search box"
    raise ReconstructionError(ReconstructionFailure(reason, R, (a0, b0), deficit))


@dataclass
class PairComparison:
    q: int
    tables: tuple[CountTable, CountTable]
    series_equal: bool
    first_discrepancy: tuple[int, int] | None

    @property
    def equal(self) -> bool:
        return self.first_discrepancy is None and self.series_equal

    def to_document(self) -> dict:
        return {
            "q": self.q,
            "counts": [list(t.counts) for t in self.tables],
            "series_equal": self.series_equal,
            "first_discrepancy": None if self.first_discrepancy is None else {"q": self.first_discrepancy[0], "r": self.first_discrepancy[1]},
            "equal": self.equal,
        }


@dataclass
class PairReport:
    spaces: tuple[str, str]
    R: int
    comparisons: list[PairComparison]

    @property
    def equal(self) -> bool:
        return all(c.equal for c in self.comparisons)

    @property
    def first_discrepancy(self) -> tuple[int, int] | None:
        for c in self.comparisons:
            if c.first_discrepancy is not None:
                return c.first_discrepancy
        return None

    def to_document(self) -> dict:
        return {"spaces": list(self.spaces), "R": self.R, "comparisons": [c.to_document() for c in self.comparisons], "equal": self.equal}


def compare_pair(X, Xp, qs: Sequence[int], R: int, budget: int = DEFAULT_BUDGET) -> PairReport:
    """Compare count tables and truncated zeta series prime power by prime power."""
    X, Xp = resolve_space(X), resolve_space(Xp)
    out = []
    for q in qs:
        ta, tb = count_table(X, q, R, budget), count_table(Xp, q, R, budget)
        first = next(((q, r) for r, (a, b) in enumerate(zip(ta.counts, tb.counts), 1) if a != b), None)
        same = zeta_series(ta).coefficients() == zeta_series(tb).coefficients()
        out.append(PairComparison(q, (ta, tb), same, first))
    return PairReport((space_name(X), space_name(Xp)), R, out)


def betti_from_counts(space, q: int, R: int, budget: int = DEFAULT_BUDGET) -> RationalForm:
    space = resolve_space(space)
    z = zeta_series(count_table(space, q, R, budget))
    return rational_reconstruct(z, dim=space.dim)

