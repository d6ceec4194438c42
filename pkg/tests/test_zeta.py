from fractions import Fraction

import pytest
import sympy as sp

from kequiv import toric, zeta
from kequiv.zeta import CountBudgetError, Hypersurface, ReconstructionError, ZetaError


def _frac(v):
    return Fraction(str(sp.Rational(v)))


def test_quadric_counts_by_enumeration():
    assert zeta.count_points("quadric-P3", 2) == 9
    assert zeta.count_points("quadric-P3", 3) == 16
    assert zeta.count_points("quadric-P3", 4) == 25
    assert zeta.count_points("conic-P2", 3) == 4
    assert zeta.count_points("node-A2", 5) == 9


@pytest.mark.parametrize("q", [2, 3])
def test_quadric_weil_measure_matches_toric(q):
    brute = zeta.weil_measure("quadric-P3", q)
    closed = zeta.weil_measure("P1xP1", q)
    assert brute == closed == Fraction((q + 1) ** 2, q**2)


def test_projective_counts():
    assert zeta.count_points("P3", 3) == 40
    assert zeta.count_points("A3", 4) == 64
    assert zeta.count_points("point", 7) == 1
    assert zeta.count_table("quadric-P3", 2, 5).counts == (9, 25, 81, 289, 1089)


def test_zeta_series_of_projective_spaces():
    t = sp.Symbol("t")
    for n, q in ((1, 2), (2, 3), (3, 2)):
        z = zeta.zeta_series(zeta.count_table(f"P{n}", q, 5))
        closed = 1
        for i in range(n + 1):
            closed /= 1 - q**i * t
        want = sp.series(closed, t, 0, 6).removeO()
        assert z.coefficients() == [_frac(want.coeff(t, j)) for j in range(6)]
    assert zeta.zeta_series(zeta.count_table("P1", 2, 4)).coefficients() == [1, 3, 7, 15, 31]


def test_reconstruct_projective_line():
    z = zeta.zeta_series(zeta.count_table("P1", 2, 4))
    form = zeta.rational_reconstruct(z, dim=1)
    assert form.numerator == (1,)
    assert form.denominator == (1, -3, 2)
    assert form.betti == {0: 1, 1: 1}
    assert form.expand(4) == z.coefficients()


def test_flop_twins_reconstruct_identically():
    forms = [zeta.betti_from_counts(f"conifold-3fold/{s}", 2, 7) for s in "AB"]
    assert forms[0].denominator == forms[1].denominator
    assert forms[0].numerator == forms[1].numerator
    assert forms[0].betti == forms[1].betti == {0: 1, 1: 2, 2: 2, 3: 1}


def test_short_series_reports_deficit():
    with pytest.raises(ReconstructionError) as info:
        zeta.betti_from_counts("conifold-3fold/A", 2, 3)
    failure = info.value.failure
    assert failure.R == 3 and failure.deficit == 5


def test_pair_comparison():
    rep = zeta.compare_pair("conifold-3fold/A", "conifold-3fold/B", [2, 3, 5], 3)
    assert rep.equal and rep.first_discrepancy is None
    other = zeta.compare_pair("P2", "P1xP1", [2], 3)
    assert not other.equal
    assert other.first_discrepancy == (2, 1)


def test_refusals_and_errors():
    with pytest.raises(CountBudgetError):
        zeta.count_points("quadric-P3", 81, budget=10**6)
    with pytest.raises(ZetaError):
        zeta.count_points("P2", 6)
    with pytest.raises(ZetaError):
        zeta.resolve_space("Enriques")
    with pytest.raises(ZetaError):
        zeta.zeta_series(zeta.CountTable("empty", 2, ()))
    with pytest.raises(ZetaError):
        Hypersurface("bad", ("x", "y", "z"), "x*y - z", True)


def test_documents():
    h = Hypersurface.from_document(zeta.HYPERSURFACES["quadric-P3"].to_document())
    assert h == zeta.HYPERSURFACES["quadric-P3"] and h.dim == 2
    z = zeta.zeta_series(zeta.count_table("P1", 2, 4))
    zeta.rational_reconstruct(z, dim=1)
    doc = z.to_document()
    assert doc["rational"]["betti"] == {"b0": 1, "b2": 1}


@pytest.mark.parametrize("name", toric.fan_names())
def test_counts_agree_with_e_polynomial(name):
    table = zeta.count_table(name, 3, 3)
    e = toric.gallery_fan(name).e_polynomial()
    assert table.counts == tuple(toric.evaluate_uv(e, 3**r) for r in (1, 2, 3))
