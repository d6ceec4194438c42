from fractions import Fraction

import pytest
import sympy as sp

from kequiv import chow, genera, toric
from kequiv.exactalg import RatFunc, SeriesRing, series_invert
from kequiv.genera import GenusError, GenusSpec

ELL = GenusSpec("elliptic", q_order=2)
BLOWUPS = ["Bl_pt P2", "Bl_pt P3", "Bl_line P3"]


def _frac(v) -> Fraction:
    return Fraction(str(sp.Rational(v)))


def test_todd_coefficients_match_sympy():
    sx = sp.Symbol("x")
    want = sp.series(sx / (1 - sp.exp(-sx)), sx, 0, 9).removeO()
    Q = genera.characteristic_series(GenusSpec("todd"), 8).Q
    for j in range(9):
        assert Q.coefficient({"x": j}).to_fraction() == _frac(want.coeff(sx, j))


def test_elliptic_series_matches_sympy():
    # independent expansion at k = 1/3, y = 2: truncated exponentials and
    # every q-denominator as a finite geometric sum
    sx, sq = sp.symbols("x q")
    k, y = sp.Rational(1, 3), sp.Integer(2)
    X, M = 2, 2

    def trunc(e):
        poly = sp.Poly(sp.expand(e), sx, sq)
        return sum(c * sx**a * sq**b for (a, b), c in poly.terms() if a <= X and b <= M)

    ex = sum(sx**j / sp.factorial(j) for j in range(X + 1))
    emx = sum((-sx) ** j / sp.factorial(j) for j in range(X + 1))
    prod = sp.Integer(1)
    for n in range(1, M + 1):
        qn = sq**n
        prod = trunc(prod * (1 - qn * ex * y) * (1 - qn * emx / y) * (1 - qn) ** 2)
        for u in (ex, emx, y, 1 / y):
            prod = trunc(prod * sum((qn * u) ** j for j in range(M // n + 1)))
    lead = sx * sp.exp(k * sx) * (1 - sp.exp(-sx) / y) / ((1 - sp.exp(-sx)) * (1 - 1 / y))
    want = trunc(sp.series(lead, sx, 0, X + 1).removeO() * prod)
    got = genera.characteristic_series(GenusSpec("elliptic", k=Fraction(1, 3), y=2, q_order=M), X).Q
    for a in range(X + 1):
        for b in range(M + 1):
            assert got.coefficient({"x": a, "q": b}).to_fraction() == _frac(want.coeff(sx, a).coeff(sq, b))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_todd_genus_of_projective_space(n):
    assert genera.genus(chow.space(f"P{n}"), GenusSpec("todd")).scalar() == 1


def test_chi_y_of_projective_spaces():
    y = RatFunc.param("y")
    for n in (1, 2, 3):
        want = sum(((-y) ** p for p in range(1, n + 1)), RatFunc(1))
        assert genera.genus(chow.space(f"P{n}"), GenusSpec("chi_y", k=0)).scalar() == want
    assert genera.genus(chow.space("P2"), GenusSpec("chi_y", k=0)).scalar() == 1 - y + y * y


def test_chi_y_at_minus_one_is_euler_number():
    for name in ("P2", "P1xP1", "Bl_pt P3", "Bl_line P3"):
        P = chow.space(name)
        val = genera.genus(P, GenusSpec("chi_y", k=0), normalized=False).subs_params(y=-1).scalar()
        assert val == P.integrate(P.chern[P.dim])


def test_multiplicative_on_products():
    for spec in (GenusSpec("chi_y"), GenusSpec("elliptic", q_order=2)):
        g1 = genera.genus(chow.space("P1"), spec)
        assert genera.genus(chow.space("P1xP1"), spec) == g1 * g1
        assert genera.genus(chow.space("P1xP1xP1"), spec) == g1 * g1 * g1


def test_chern_numbers():
    assert genera.chern_numbers(chow.space("P2")) == {(2,): 3, (1, 1): 9}
    assert genera.chern_numbers(chow.space("P1xP1")) == {(2,): 4, (1, 1): 8}
    assert genera.chern_numbers(chow.space("P3")) == {(3,): 4, (2, 1): 24, (1, 1, 1): 64}
    assert genera.partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]


def test_functional_equation_and_control():
    rep = genera.verify_functional_equation(GenusSpec("elliptic", q_order=3), x_order=6)
    assert rep.verified and rep.details["nonzero_coefficients"] == 0
    ring = SeriesRing(("x",), (13,))
    x = ring.gen("x")
    ctl = genera.verify_functional_equation(x_order=6, control=series_invert(1 + x * x))
    assert not ctl.verified and ctl.first_discrepancy is not None


def test_control_passes_at_low_order_only():
    # f = x + x^3 first violates the equation beyond x-order 3
    ring = SeriesRing(("x",), (13,))
    x = ring.gen("x")
    ctl = series_invert(1 + x * x)
    assert genera.verify_functional_equation(x_order=3, control=ctl).verified
    assert not genera.verify_functional_equation(x_order=6, control=ctl).verified


def test_chi_y_satisfies_equation():
    assert genera.verify_functional_equation(GenusSpec("chi_y"), x_order=5).verified


def test_jacobian_equation_and_normalizations():
    assert genera.verify_jacobian_equation(GenusSpec("elliptic", q_order=3), x_order=6).verified
    for spec in (GenusSpec("elliptic", q_order=2), GenusSpec("chi_y"), GenusSpec("todd")):
        assert genera.jacobian_normalizations(spec).verified
    assert genera.jacobian_factor(GenusSpec("todd"), 3, 4) == SeriesRing(("t",), (4,)).one()
    with pytest.raises(GenusError):
        genera.jacobian_factor(ELL, 0, 3)


@pytest.mark.parametrize("name", BLOWUPS)
@pytest.mark.parametrize("spec", [GenusSpec("todd"), GenusSpec("chi_y"), ELL], ids=["todd", "chi_y", "elliptic"])
def test_change_of_variable(name, spec):
    residue, kills, cov = genera.verify_change_of_variable(chow.gallery(name), spec)
    assert residue.verified, residue.first_discrepancy
    assert kills.verified
    assert cov.verified, cov.first_discrepancy
    assert cov.details["jacobian_is_one"] == (spec.kind == "todd")


def test_change_of_variable_detects_wrong_discrepancy():
    datum = chow.gallery("Bl_pt P3")
    datum.discrepancies = [1]
    _, kills, cov = genera.verify_change_of_variable(datum, GenusSpec("chi_y"))
    assert not kills.verified and not cov.verified


@pytest.mark.parametrize("name", ["P1", "P2", "P1xP1", "P3"])
def test_bundle_route(name):
    P = chow.space(name)
    assert genera.genus_via_bundle(P, ELL) == genera.genus(P, ELL)


def test_printed_reading_differs_at_first_q_order():
    P = chow.space("P2")
    spec = GenusSpec("elliptic", q_order=1)
    diff = genera.genus_via_bundle(P, spec, reading="printed") - genera.genus(P, spec)
    assert diff.coefficient({"q": 0}).is_zero()
    assert not diff.coefficient({"q": 1}).is_zero()


@pytest.mark.parametrize("name", ["P1", "P2", "P1xP1", "P3"])
def test_q_zero_layer_is_twisted_chi_y(name):
    P = chow.space(name)
    for y0 in (2, 3, Fraction(-1, 2)):
        ell = genera.genus(P, GenusSpec("elliptic", y=y0, q_order=1)).coefficient({"q": 0})
        chi = genera.genus(P, GenusSpec("chi_y", y=-1 / Fraction(y0)), normalized=True).scalar()
        assert ell == chi


def test_flop_invariance():
    X, Xp, _ = toric.flop_pair("conifold-3fold")
    reports = genera.flop_invariance(X.chow, Xp.chow, [GenusSpec("todd"), GenusSpec("chi_y"), ELL])
    assert all(r.verified for r in reports)
    assert genera.chern_numbers(X.chow) == genera.chern_numbers(Xp.chow)


def test_genus_distinguishes_non_equivalent_spaces():
    a = genera.genus(chow.space("P2"), ELL)
    b = genera.genus(chow.space("P1xP1"), ELL)
    assert a != b


def test_spec_validation():
    with pytest.raises(GenusError):
        GenusSpec("signature")
    with pytest.raises(GenusError):
        GenusSpec("todd", k=1)
    with pytest.raises(GenusError):
        genera.characteristic_series(GenusSpec("elliptic", y=1), 3)
    with pytest.raises(GenusError):
        genera.genus_via_bundle(chow.space("P2"), GenusSpec("todd"))
    assert GenusSpec("twisted-chi-y").kind == "chi_y"
