"""Truncated jets over finite fields for affine models and their blow-ups.

A jet of level ``m`` on an ``n``-dimensional chart is ``n`` polynomials in
``t`` of degree at most ``m`` with coefficients in GF(q).  Enumeration is
vectorised: a block of jets is an integer array of shape ``(N, n, m + 1)``
and all arithmetic goes through the lookup tables of :mod:`kequiv.fields`.

Source charts come with a ``restrict`` list so that the charts cover the
blow-up disjointly: a jet belongs to chart ``i`` only if its base point is
not in any earlier chart.
"""

from __future__ import annotations

import ast
import itertools
import json
import math
import random
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Iterator, Mapping, Sequence

import flint
import numpy as np

from .chow import RegistryError
from .fields import GF, field

DEFAULT_BUDGET = 20_000_000
BLOCK = 1 << 18
INF = math.inf


class ArcsError(ValueError):
    pass


class BudgetError(ArcsError):
    def __init__(self, required: int, budget: int, what: str = "jets"):
        super().__init__(f"enumerating {required} {what} exceeds the budget of {budget}")
        self.required = required
        self.budget = budget


class RegimeError(ArcsError):
    pass


# --- expressions ---------------------------------------------------------

_BINOPS = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "div"}


class Expression:
    """Integer Laurent-polynomial expression in named variables.

    Accepts ``+ - * /`` and integer powers written ``^`` or ``**``.  The same
    tree is evaluated over several algebras (symbolic polynomials, field
    points, truncated jets).
    """

    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.names = tuple(names)
        try:
            # ``^`` binds looser than ``-`` in Python's grammar
            self._tree = ast.parse(text.replace("^", "**"), mode="eval").body
        except SyntaxError as exc:
            raise ArcsError(f"cannot parse {text!r}: {exc.msg}") from None
        self.laurent = False
        self._check(self._tree)

    def _check(self, node):
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) and type(node.right.value) is int and node.right.value >= 0):
                    raise ArcsError(f"{self.text!r}: exponents must be non-negative integer literals")
                self._check(node.left)
                return
            if type(node.op) not in _BINOPS:
                raise ArcsError(f"{self.text!r}: unsupported operator")
            if isinstance(node.op, ast.Div):
                self.laurent = True
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            self._check(node.operand)
        elif isinstance(node, ast.Name):
            if node.id not in self.names:
                raise ArcsError(f"{self.text!r}: unknown variable {node.id!r}")
        elif isinstance(node, ast.Constant) and type(node.value) is int:
            pass
        else:
            raise ArcsError(f"{self.text!r}: unsupported syntax")

    def evaluate(self, env: Sequence, alg):
        def ev(node):
            if isinstance(node, ast.BinOp):
                if isinstance(node.op, ast.Pow):
                    base, e = ev(node.left), node.right.value
                    out = alg.const(1)
                    for _ in range(e):
                        out = alg.mul(out, base)
                    return out
                return getattr(alg, _BINOPS[type(node.op)])(ev(node.left), ev(node.right))
            if isinstance(node, ast.UnaryOp):
                v = ev(node.operand)
                return alg.neg(v) if isinstance(node.op, ast.USub) else v
            if isinstance(node, ast.Name):
                return env[self.names.index(node.id)]
            return alg.const(node.value)

        return ev(self._tree)


class _MpolyAlgebra:
    def __init__(self, ctx):
        self.ctx = ctx

    def const(self, c):
        return self.ctx.constant(c)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def div(self, a, b):
        raise ArcsError("division is not allowed in a polynomial map")


class _JetAlgebra:
    """Truncated power series mod ``t^(m+1)`` over GF(q), batched along axis 0.

    ``valid`` records which rows had every divisor a unit.
    """

    def __init__(self, F: GF, m: int, size: int):
        self.F, self.m, self.size = F, m, size
        self.valid = np.ones(size, dtype=bool)

    def const(self, c):
        out = np.zeros((self.size, self.m + 1), dtype=np.int64)
        out[:, 0] = self.F.embed_int(c)
        return out

    def add(self, a, b):
        return self.F.add[a, b]

    def sub(self, a, b):
        return self.F.sub[a, b]

    def neg(self, a):
        return self.F.neg[a]

    def mul(self, a, b):
        F, m = self.F, self.m
        out = np.zeros_like(a)
        for i in range(m + 1):
            ai = a[:, i]
            if not ai.any():
                continue
            for j in range(m + 1 - i):
                out[:, i + j] = F.add[out[:, i + j], F.mul[ai, b[:, j]]]
        return out

    def inverse(self, a):
        F, m = self.F, self.m
        unit = a[:, 0] != 0
        self.valid &= unit
        b = np.zeros_like(a)
        b0 = F.inv[a[:, 0]]
        b[:, 0] = b0
        for k in range(1, m + 1):
            s = np.zeros(a.shape[0], dtype=np.int64)
            for i in range(1, k + 1):
                s = F.add[s, F.mul[a[:, i], b[:, k - i]]]
            b[:, k] = F.mul[F.neg[s], b0]
        return b

    def div(self, a, b):
        return self.mul(a, self.inverse(b))


def _orders(a: np.ndarray) -> np.ndarray:
    """Index of the first nonzero coefficient; ``m + 1`` for the zero jet."""
    nz = a != 0
    return np.where(nz.any(axis=1), nz.argmax(axis=1), a.shape[1])


# --- models ---------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    name: str
    vars: tuple[str, ...]
    maps: tuple[Expression, ...]
    jacobian: Expression
    restrict: tuple[int, ...]
    inverse: tuple[Expression, ...]

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "vars": list(self.vars),
            "maps": [e.text for e in self.maps],
            "jacobian": self.jacobian.text,
            "restrict": list(self.restrict),
            "inverse": [e.text for e in self.inverse],
        }


@dataclass(frozen=True)
class JetModel:
    """A morphism ``phi`` from a smooth source, covered by affine charts, to ``A^n``.

    ``center`` generates the ideal of the blown-up locus; along an arc the
    Jacobian order equals ``multiplicity`` times the order of that ideal.
    """

    name: str
    base_vars: tuple[str, ...]
    charts: tuple[Chart, ...]
    center: tuple[Expression, ...]
    multiplicity: int
    checks: dict = dc_field(default_factory=dict, compare=False, hash=False)

    @property
    def dim(self) -> int:
        return len(self.base_vars)

    @classmethod
    def from_document(cls, doc: Mapping, check: bool = True) -> "JetModel":
        try:
            base = tuple(doc["base_vars"])
            charts = []
            for i, c in enumerate(doc["charts"]):
                vars_ = tuple(c["vars"])
                if len(vars_) != len(base) or len(c["maps"]) != len(base) or len(c["inverse"]) != len(base):
                    raise ArcsError(f"chart {i}: dimension mismatch")
                restrict = tuple(int(r) for r in c.get("restrict", []))
                if any(not 0 <= r < len(base) for r in restrict):
                    raise ArcsError(f"chart {i}: restrict index out of range")
                maps = tuple(Expression(p, vars_) for p in c["maps"])
                if any(p.laurent for p in maps):
                    raise ArcsError(f"chart {i}: maps must be polynomial")
                jac = Expression(c["jacobian"], vars_)
                if jac.laurent:
                    raise ArcsError(f"chart {i}: jacobian must be polynomial")
                charts.append(
                    Chart(c.get("name", f"U{i + 1}"), vars_, maps, jac, restrict, tuple(Expression(p, base) for p in c["inverse"]))
                )
            center = tuple(Expression(g, base) for g in doc["center"]["generators"])
            model = cls(str(doc["name"]), base, tuple(charts), center, int(doc["center"]["multiplicity"]))
        except KeyError as exc:
            raise ArcsError(f"model document is missing {exc.args[0]!r}") from None
        if check:
            model.checks.update(check_jacobians(model))
            model.checks.update(check_invertibility(model))
        return model

    def to_document(self) -> dict:
        return {
            "name": self.name,
            "base_vars": list(self.base_vars),
            "center": {"generators": [g.text for g in self.center], "multiplicity": self.multiplicity},
            "charts": [c.to_document() for c in self.charts],
        }


def check_jacobians(model: JetModel) -> dict:
    """Recompute each chart's Jacobian determinant symbolically and compare."""
    out = {}
    n = model.dim
    for chart in model.charts:
        ctx = flint.fmpz_mpoly_ctx.get(chart.vars, "lex")
        alg = _MpolyAlgebra(ctx)
        gens = ctx.gens()
        images = [p.evaluate(gens, alg) for p in chart.maps]
        mat = [[f.derivative(j) for j in range(n)] for f in images]
        det = ctx.constant(0)
        for perm in itertools.permutations(range(n)):
            sign = 1
            for a, b in itertools.combinations(range(n), 2):
                if perm[a] > perm[b]:
                    sign = -sign
            term = ctx.constant(sign)
            for i in range(n):
                term = term * mat[i][perm[i]]
            det = det + term
        stated = chart.jacobian.evaluate(gens, alg)
        if det != stated:
            raise ArcsError(f"{model.name}/{chart.name}: jacobian {chart.jacobian.text!r} differs from det = {det}")
        out[f"jacobian:{chart.name}"] = str(det)
    return out


def check_invertibility(model: JetModel, q: int = 7, samples: int = 64, seed: int = 7) -> dict:
    """Sampled check that ``phi`` and the stated inverse are mutually inverse off the exceptional locus."""
    F = field(q)
    rng = random.Random(seed)
    n = model.dim
    out = {}
    for chart in model.charts:
        pts = np.array([[rng.randrange(q) for _ in range(n)] for _ in range(samples)], dtype=np.int64)
        env = [pts[:, [i]] for i in range(n)]
        alg = _JetAlgebra(F, 0, samples)
        jac = chart.jacobian.evaluate(env, alg)[:, 0]
        img = [p.evaluate(env, alg) for p in chart.maps]
        alg2 = _JetAlgebra(F, 0, samples)
        back = np.hstack([p.evaluate(img, alg2) for p in chart.inverse])
        off = jac != 0
        if not alg2.valid[off].all() or not (back[off] == pts[off]).all():
            raise ArcsError(f"{model.name}/{chart.name}: inverse fails on a point off the exceptional locus")
        alg3 = _JetAlgebra(F, 0, samples)
        pre = [p.evaluate(env, alg3) for p in chart.inverse]
        ok = alg3.valid
        fwd = np.hstack([p.evaluate(pre, _JetAlgebra(F, 0, samples)) for p in chart.maps])
        if not (fwd[ok] == pts[ok]).all():
            raise ArcsError(f"{model.name}/{chart.name}: phi does not invert the stated inverse")
        out[f"inverse:{chart.name}"] = int(off.sum() + ok.sum())
    return out


@lru_cache(maxsize=None)
def _documents() -> dict:
    doc = json.loads(resources.files("kequiv").joinpath("data/jet_models.json").read_text())
    return {m["name"]: m for m in doc["models"]}


def model_names() -> list[str]:
    return list(_documents())


@lru_cache(maxsize=None)
def jet_model(name: str) -> JetModel:
    docs = _documents()
    if name not in docs:
        raise RegistryError(f"no jet model named {name!r}")
    return JetModel.from_document(docs[name])


@lru_cache(maxsize=None)
def affine_space(n: int) -> JetModel:
    """Identity model on ``A^n``."""
    names = [f"x{i}" for i in range(n)]
    doc = {
        "name": f"A{n}",
        "base_vars": names,
        "center": {"generators": ["1"], "multiplicity": 1},
        "charts": [{"name": f"A{n}", "vars": names, "maps": names, "jacobian": "1", "restrict": [], "inverse": names}],
    }
    return JetModel.from_document(doc)


# --- jets -----------------------------------------------------------------


@dataclass(frozen=True)
class JetPoint:
    q: int
    m: int
    coords: tuple[tuple[int, ...], ...]
    chart: str | None = None

    def __post_init__(self):
        for c in self.coords:
            if len(c) != self.m + 1:
                raise ArcsError(f"jet coordinate {c} does not have {self.m + 1} coefficients")
            if any(not 0 <= a < self.q for a in c):
                raise ArcsError(f"jet coordinate {c} has entries outside GF({self.q})")

    def array(self) -> np.ndarray:
        return np.array([self.coords], dtype=np.int64)


def _chart(model: JetModel, chart) -> Chart:
    if chart is None:
        return model.charts[0]
    if isinstance(chart, Chart):
        return chart
    for c in model.charts:
        if c.name == chart:
            return c
    raise ArcsError(f"{model.name} has no chart {chart!r}")


def _free_slots(n: int, m: int, restrict: Sequence[int]) -> list[tuple[int, int]]:
    return [(i, d) for i in range(n) for d in range(m + 1) if not (d == 0 and i in restrict)]


def _blocks(n: int, m: int, q: int, restrict: Sequence[int], budget: int) -> Iterator[np.ndarray]:
    slots = _free_slots(n, m, restrict)
    total = q ** len(slots)
    if total > budget:
        raise BudgetError(total, budget)
    for start in range(0, total, BLOCK):
        idx = np.arange(start, min(total, start + BLOCK), dtype=np.int64)
        out = np.zeros((idx.size, n, m + 1), dtype=np.int64)
        for i, d in slots:
            out[:, i, d] = idx % q
            idx = idx // q
        yield out


def jet_count(model: JetModel, m: int, q: int, disjoint: bool = False) -> int:
    n = model.dim
    return sum(q ** len(_free_slots(n, m, c.restrict if disjoint else ())) for c in model.charts)


def enumerate_jets(
    model: JetModel, m: int, q: int, *, chart=None, disjoint: bool = False, budget: int = DEFAULT_BUDGET
) -> Iterator[JetPoint]:
    """All level-``m`` jets on each chart (or one chart), each exactly once.

    With ``disjoint`` the chart restrictions apply and the charts together
    enumerate the jets of the source without repetition.
    """
    if m < 0:
        raise ArcsError("truncation level must be non-negative")
    field(q)
    charts = model.charts if chart is None else (_chart(model, chart),)
    n = model.dim
    for c in charts:
        restrict = c.restrict if disjoint else ()
        for block in _blocks(n, m, q, restrict, budget):
            for row in block:
                yield JetPoint(q, m, tuple(tuple(int(a) for a in r) for r in row), c.name)


def _push(chart: Chart, block: np.ndarray, F: GF, m: int) -> list[np.ndarray]:
    env = [block[:, i, :] for i in range(block.shape[1])]
    alg = _JetAlgebra(F, m, block.shape[0])
    return [p.evaluate(env, alg) for p in chart.maps]


def _jac_orders(chart: Chart, block: np.ndarray, F: GF, m: int) -> np.ndarray:
    env = [block[:, i, :] for i in range(block.shape[1])]
    return _orders(chart.jacobian.evaluate(env, _JetAlgebra(F, m, block.shape[0])))


def jet_pushforward(model: JetModel, jet: JetPoint, chart=None) -> JetPoint:
    """Compose the jet with ``phi`` and truncate."""
    c = _chart(model, chart if chart is not None else jet.chart)
    out = _push(c, jet.array(), field(jet.q), jet.m)
    return JetPoint(jet.q, jet.m, tuple(tuple(int(a) for a in p[0]) for p in out), None)


def ord_jacobian(model: JetModel, jet: JetPoint, chart=None):
    """``ord_t`` of the Jacobian along the jet, or ``math.inf`` if it vanishes mod ``t^(m+1)``."""
    c = _chart(model, chart if chart is not None else jet.chart)
    k = int(_jac_orders(c, jet.array(), field(jet.q), jet.m)[0])
    return INF if k > jet.m else k


def _keys(images: Sequence[np.ndarray], q: int, m: int) -> np.ndarray:
    key = np.zeros(images[0].shape[0], dtype=np.int64)
    for p in reversed(images):
        for d in range(m, -1, -1):
            key = key * q + p[:, d]
    return key


@dataclass
class _SourceData:
    orders: np.ndarray
    keys: np.ndarray
    charts: np.ndarray


_CACHE: dict = {}


def _source_data(model: JetModel, m: int, q: int, budget: int) -> _SourceData:
    cache_key = (model.name, id(model), m, q)
    if cache_key in _CACHE:
        return _CACHE[cache_key]
    if q ** (model.dim * (m + 1)) >= 2**62:
        raise BudgetError(q ** (model.dim * (m + 1)), budget, "image keys")
    F = field(q)
    orders, keys, charts = [], [], []
    for ci, chart in enumerate(model.charts):
        for block in _blocks(model.dim, m, q, chart.restrict, budget):
            orders.append(_jac_orders(chart, block, F, m).astype(np.int16))
            keys.append(_keys(_push(chart, block, F, m), q, m))
            charts.append(np.full(block.shape[0], ci, dtype=np.int8))
    data = _SourceData(np.concatenate(orders), np.concatenate(keys), np.concatenate(charts))
    if len(_CACHE) > 8:
        _CACHE.clear()
    _CACHE[cache_key] = data
    return data


def _base_orders(model: JetModel, m: int, q: int, budget: int) -> np.ndarray:
    """``multiplicity * ord_t(center ideal)`` for every base jet; ``m + 1`` stands for infinity."""
    F = field(q)
    out = []
    for block in _blocks(model.dim, m, q, (), budget):
        env = [block[:, i, :] for i in range(model.dim)]
        alg = _JetAlgebra(F, m, block.shape[0])
        o = np.min([_orders(g.evaluate(env, alg)) for g in model.center], axis=0)
        k = np.where(o > m, m + 1, np.minimum(o * model.multiplicity, m + 1))
        out.append(k.astype(np.int16))
    return np.concatenate(out)


# --- reports --------------------------------------------------------------


@dataclass
class FibrationReport:
    model: str
    m: int
    q: int
    k: int
    source_count: int
    image_count: int
    fiber_sizes: dict
    collisions: int
    status: str

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def to_document(self) -> dict:
        return {
            "model": self.model,
            "m": self.m,
            "q": self.q,
            "k": self.k,
            "source_count": self.source_count,
            "image_count": self.image_count,
            "fiber_sizes": {str(s): c for s, c in sorted(self.fiber_sizes.items())},
            "collisions": self.collisions,
            "status": self.status,
        }


def verify_fibration(model: JetModel, m: int, q: int, k: int, budget: int = DEFAULT_BUDGET) -> FibrationReport:
    """Every nonempty fibre of ``phi_m`` over the ``k``-stratum has ``q^k`` points.

    ``collisions`` counts stratum images that are also hit by jets of a
    different Jacobian order, which would make the stratum fibre smaller
    than the full fibre.
    """
    if k < 0:
        raise RegimeError("k must be non-negative")
    if m < 2 * k:
        raise RegimeError(f"fibre structure is only claimed for m >= 2k; got m={m}, k={k}")
    data = _source_data(model, m, q, budget)
    mask = data.orders == k
    images, counts = np.unique(data.keys[mask], return_counts=True)
    hist = Counter(int(c) for c in counts)
    collisions = int(np.isin(images, data.keys[~mask]).sum())
    ok = set(hist) <= {q**k} and collisions == 0
    return FibrationReport(model.name, m, q, k, int(mask.sum()), int(images.size), dict(hist), collisions, "verified" if ok else "refuted")


@dataclass
class Stratum:
    k: int
    source_count: int
    image_count: int
    base_count: int
    fiber_sizes: dict

    def holds(self, q: int) -> bool:
        return self.source_count == q**self.k * self.image_count and self.image_count == self.base_count

    def to_document(self) -> dict:
        return {
            "k": self.k,
            "source_count": self.source_count,
            "image_count": self.image_count,
            "base_count": self.base_count,
            "fiber_sizes": {str(s): c for s, c in sorted(self.fiber_sizes.items())},
        }


@dataclass
class CountingReport:
    model: str
    m: int
    q: int
    K_max: int
    strata: list[Stratum]
    weighted_source: Fraction
    base_total: int
    excluded: int
    unexamined: int
    status: str

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def to_document(self) -> dict:
        return {
            "model": self.model,
            "m": self.m,
            "q": self.q,
            "K_max": self.K_max,
            "strata": [s.to_document() for s in self.strata],
            "weighted_source": str(self.weighted_source),
            "base_total": self.base_total,
            "excluded": self.excluded,
            "unexamined": self.unexamined,
            "status": self.status,
        }


def counting_change_of_variable(model: JetModel, m: int, q: int, K_max: int, budget: int = DEFAULT_BUDGET) -> CountingReport:
    """Per stratum: ``|S_k| = q^k |phi_m(S_k)|`` and the image equals the base jets of centre order ``k``.

    Summing gives ``sum_k q^-k |S_k|`` against a direct count of the base
    jets in the same strata.  Jets with Jacobian order above ``m/2`` are
    excluded and counted.
    """
    if K_max < 0 or m < 2 * K_max:
        raise RegimeError(f"counting identities need m >= 2 K_max; got m={m}, K_max={K_max}")
    data = _source_data(model, m, q, budget)
    base = _base_orders(model, m, q, budget)
    strata = []
    for k in range(K_max + 1):
        mask = data.orders == k
        images, counts = np.unique(data.keys[mask], return_counts=True)
        strata.append(
            Stratum(k, int(mask.sum()), int(images.size), int((base == k).sum()), dict(Counter(int(c) for c in counts)))
        )
    weighted = sum((Fraction(s.source_count, q**s.k) for s in strata), Fraction(0))
    base_total = sum(s.base_count for s in strata)
    excluded = int((data.orders > m // 2).sum())
    unexamined = int(((data.orders > K_max) & (data.orders <= m // 2)).sum())
    ok = all(s.holds(q) for s in strata) and weighted == base_total
    return CountingReport(model.name, m, q, K_max, strata, weighted, base_total, excluded, unexamined, "verified" if ok else "refuted")


def overlap_orders_agree(model: JetModel, m: int, q: int, budget: int = DEFAULT_BUDGET) -> dict:
    """Compare Jacobian orders of the same jet read in two charts.

    A chart-``i`` jet lies in chart ``j`` when chart ``j``'s inverse is
    defined along it; the transition is that inverse composed with ``phi``.
    Returns the number of overlap jets checked per ordered chart pair and
    the number of disagreements (orders or images).
    """
    F = field(q)
    checked, bad = {}, 0
    for ci, cj in itertools.permutations(model.charts, 2):
        count = 0
        for block in _blocks(model.dim, m, q, (), budget):
            img = _push(ci, block, F, m)
            alg = _JetAlgebra(F, m, block.shape[0])
            other = np.stack([p.evaluate(img, alg) for p in cj.inverse], axis=1)
            ok = alg.valid
            if not ok.any():
                continue
            oi = _jac_orders(ci, block[ok], F, m)
            oj = _jac_orders(cj, other[ok], F, m)
            back = _push(cj, other[ok], F, m)
            same_image = np.all([(a == b[ok]).all(axis=1) for a, b in zip(back, img)], axis=0)
            bad += int((oi != oj).sum() + (~same_image).sum())
            count += int(ok.sum())
        checked[f"{ci.name}->{cj.name}"] = count
    return {"checked": checked, "disagreements": bad}
