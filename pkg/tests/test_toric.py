import itertools

import pytest

from kequiv import toric
from kequiv.toric import CompletenessError, FanError, FlopError, SmoothnessError, build_toric, evaluate_uv


def test_non_unimodular_cone_rejected():
    with pytest.raises(SmoothnessError) as info:
        build_toric({"dim": 2, "rays": [[1, 0], [1, 2], [-1, -1]], "cones": [[0, 1], [1, 2], [0, 2]]})
    assert abs(info.value.det) == 2


def test_gap_in_fan_rejected():
    # the cone between rays 1 and 2 is missing
    with pytest.raises(CompletenessError):
        build_toric({"dim": 2, "rays": [[1, 0], [0, 1], [-1, -1]], "cones": [[0, 1], [0, 2]]})


def test_overlapping_fan_rejected():
    rays = [[1, 0], [0, 1], [-1, 0], [0, -1], [1, 1]]
    cones = [[0, 1], [1, 2], [2, 3], [0, 3], [0, 4]]
    with pytest.raises(FanError):
        build_toric({"dim": 2, "rays": rays, "cones": cones})


def test_malformed_documents():
    with pytest.raises(FanError):
        build_toric({"dim": 2, "rays": [[2, 0], [0, 1], [-1, -1]], "cones": [[0, 1], [1, 2], [0, 2]]})
    with pytest.raises(FanError):
        build_toric({"dim": 2, "rays": [[1, 0]]})
    with pytest.raises(FanError):
        build_toric({"dim": 2, "rays": [["a", 0]], "cones": []})


def test_intersection_numbers():
    P2 = toric.gallery_fan("P2")
    assert P2.intersection_number([0, 1]) == 1
    assert P2.intersection_number([0, 0]) == 1
    F1 = toric.gallery_fan("Bl_pt P2")
    assert F1.intersection_number([3, 3]) == -1
    assert F1.intersection_number([2, 2]) == 1
    Q = toric.gallery_fan("P1xP1")
    assert Q.intersection_number([0, 0]) == 0
    assert Q.intersection_number([0, 1]) == 1
    with pytest.raises(FanError):
        Q.intersection_number([0])


@pytest.mark.parametrize("name", toric.fan_names())
def test_direct_reduction_matches_presentation(name):
    sp = toric.gallery_fan(name)
    P = sp.chow
    N = len(sp.fan.rays)
    for combo in itertools.combinations_with_replacement(range(N), sp.dim):
        cls = P.one()
        for i in combo:
            cls = cls * P.gen(f"D{i}")
        assert P.integrate(cls) == sp.intersection_number(combo)


def _projective_count(n, q):
    return sum(q**i for i in range(n + 1))


def test_point_counts():
    assert toric.gallery_fan("P2").point_count(2) == 7
    assert toric.gallery_fan("Bl_pt P2").point_count(2) == 9
    assert toric.gallery_fan("P1xP1").point_count(3) == 16
    for n in (1, 2, 3, 4):
        for q in (2, 3, 4, 5, 7):
            assert toric.gallery_fan(f"P{n}").point_count(q) == _projective_count(n, q)
    with pytest.raises(ValueError):
        toric.gallery_fan("P2").point_count(1)


@pytest.mark.parametrize("name", toric.fan_names())
def test_e_polynomial(name):
    sp = toric.gallery_fan(name)
    E = sp.e_polynomial()
    assert E == E[::-1]
    assert all(c > 0 for c in E)
    for q in (2, 3, 4, 5):
        assert evaluate_uv(E, q) == sp.point_count(q)


def test_flop_pair():
    X, Xp, desc = toric.flop_pair("conifold-3fold")
    assert desc.k_equivalent and len(desc.square) == 4
    assert X.e_polynomial() == Xp.e_polynomial() == (1, 2, 2, 1)
    for q in (2, 3, 5):
        assert X.point_count(q) == Xp.point_count(q)
    assert X.chow.betti() == Xp.chow.betti()


def test_not_a_flop():
    X, _, _ = toric.flop_pair("conifold-3fold")
    with pytest.raises(FlopError):
        toric.flop_descriptor("same", X.fan.rays, X.fan.cones, X.fan.cones)
    # swapping one cone for another is not a square retriangulation
    cones_b = [c for c in X.fan.cones if c != (1, 2, 4)] + [(0, 1, 4)]
    with pytest.raises(FlopError):
        toric.flop_descriptor("lopsided", X.fan.rays, X.fan.cones, cones_b)


def test_unknown_fan():
    from kequiv.chow import RegistryError

    with pytest.raises(RegistryError):
        toric.gallery_fan("P9")
    with pytest.raises(RegistryError):
        toric.flop_pair("atiyah")


def test_document_round_trip():
    sp = toric.gallery_fan("Bl_line P3")
    again = build_toric(sp.fan.to_document())
    assert again.fan == sp.fan
