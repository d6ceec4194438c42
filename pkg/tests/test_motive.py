from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from kequiv import motive, toric
from kequiv.motive import BlowupClasses, MotiveError, MotiveExpr, SncResolutionData


def test_basic_classes():
    assert motive.class_of("P2").polynomial() == [1, 1, 1]
    assert motive.class_of("Bl_pt P2").polynomial() == [1, 2, 1]
    assert motive.class_of("pt").polynomial() == [1]
    assert motive.class_of("P1xP1") == motive.class_of("P1") * motive.class_of("P1")
    assert MotiveExpr.projective(3).polynomial() == [1, 1, 1, 1]
    assert MotiveExpr.lefschetz().polynomial() == [0, 1]


def test_expression_arithmetic():
    P1 = MotiveExpr.projective(1)
    assert P1.divide_by_projective(1) == 1
    third = MotiveExpr(1).divide_by_projective(2)
    assert not third.is_polynomial()
    assert third * MotiveExpr.projective(2) == 1
    assert (third + third).evaluate(2) == Fraction(2, 7)
    with pytest.raises(MotiveError):
        third.polynomial()
    with pytest.raises(ZeroDivisionError):
        MotiveExpr(1).divide_by_projective(1).evaluate(-1)


@pytest.mark.parametrize("data", motive.gallery_blowup_classes(), ids=lambda d: d.name)
def test_blowup_identities(data):
    rel, loc = motive.blowup_identity(data)
    assert rel.verified and loc.verified


def test_corrupted_exceptional_class_fails():
    good = next(d for d in motive.gallery_blowup_classes() if d.name == "Bl_pt P2")
    bad = BlowupClasses(good.name, good.X, good.Y, MotiveExpr([1, 2]), good.Z, good.codim)
    assert not any(r.verified for r in motive.blowup_identity(bad))


def test_snc_recovers_plane():
    data = next(d for d in motive.gallery_blowup_classes() if d.name == "Bl_pt P2")
    snc = motive.blowup_snc_data(data, 1)
    assert motive.snc_class(snc) == motive.class_of("P2")
    assert motive.snc_forms_agree(snc)


@pytest.mark.parametrize("data", motive.gallery_blowup_classes(), ids=lambda d: d.name)
def test_snc_with_blowup_discrepancy_recovers_base(data):
    snc = motive.blowup_snc_data(data, data.codim - 1)
    assert motive.snc_class(snc) == data.X


def test_crepant_data_is_unchanged():
    data = next(d for d in motive.gallery_blowup_classes() if d.name == "Bl_pt P3")
    snc = motive.blowup_snc_data(data, 0)
    assert motive.snc_class(snc) == data.Y


def _direct(strata, disc, v):
    total = Fraction(0)
    for I, coeffs in strata.items():
        term = Fraction(sum(c * v**i for i, c in enumerate(coeffs)))
        for i in I:
            term *= Fraction(v - 1, v ** (disc[i] + 1) - 1)
        total += term
    return total


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.integers(0, 3), min_size=1, max_size=3),
    st.dictionaries(
        st.frozensets(st.integers(0, 2), max_size=3),
        st.lists(st.integers(0, 4), min_size=1, max_size=4),
        min_size=1,
        max_size=6,
    ),
)
def test_random_snc_forms_agree(discs, raw):
    disc = dict(enumerate(discs))
    strata = {I: c for I, c in raw.items() if I <= set(disc)}
    if not strata:
        return
    classes = {I: MotiveExpr(c) for I, c in strata.items()}
    total = MotiveExpr(0)
    for c in classes.values():
        total = total + c
    data = SncResolutionData(classes, disc, total)
    assert motive.snc_forms_agree(data)
    got = motive.snc_class(data)
    for v in (2, 3, 5):
        assert got.evaluate(v) == _direct(strata, disc, v)


def test_snc_validation():
    with pytest.raises(MotiveError):
        SncResolutionData({frozenset({7}): MotiveExpr(1)}, {1: 0}, MotiveExpr(1)).validate()
    with pytest.raises(MotiveError):
        SncResolutionData({frozenset(): MotiveExpr(1)}, {}, MotiveExpr(2)).validate()
    with pytest.raises(MotiveError):
        SncResolutionData.from_document({"strata": [{"subset": [1]}]})


def test_document_round_trip():
    data = next(d for d in motive.gallery_blowup_classes() if d.name == "Bl_pt P2")
    snc = motive.blowup_snc_data(data, 1)
    again = SncResolutionData.from_document(snc.to_document())
    assert motive.snc_class(again) == motive.snc_class(snc)


def test_stringy_e_of_a1():
    _, (res,) = motive.singular_model("A1-surface")
    data = motive.toric_resolution_data(res)
    assert list(data.discrepancies.values()) == [0]
    e = motive.stringy_e(data)
    assert e.polynomial == [0, 1, 1]
    assert e.hodge_table() == {"h^0,0": 0, "h^1,1": 1, "h^2,2": 1}


@pytest.mark.parametrize("name", ["conifold", "smooth-plane"])
def test_resolutions_agree(name):
    _, resolutions = motive.singular_model(name)
    values = [motive.stringy_e(motive.toric_resolution_data(r)) for r in resolutions]
    assert len(values) >= 2
    assert all(v == values[0] for v in values)


def test_conifold_blowup_has_discrepancy_one():
    _, resolutions = motive.singular_model("conifold")
    blow = next(r for r in resolutions if r.name == "vertex-blowup")
    data = motive.toric_resolution_data(blow)
    assert list(data.discrepancies.values()) == [1]
    # the ordinary class differs from the stringy one
    assert data.resolved_class != motive.snc_class(data)


@pytest.mark.parametrize("name", toric.fan_names())
def test_class_counts_points(name):
    cls = motive.class_of(name)
    sp = toric.gallery_fan(name)
    for q in (2, 3, 4, 5):
        assert cls.evaluate(q) == sp.point_count(q)


def test_flop_twins_share_class():
    assert motive.class_of("conifold-3fold/A") == motive.class_of("conifold-3fold/B")


def test_unknown_space():
    with pytest.raises(MotiveError):
        motive.class_of("K3")
