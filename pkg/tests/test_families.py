"""Family builders, the toric oracle, local analyzers and the elliptic
height bridge."""

import math
from fractions import Fraction

import mpmath
import pytest

from heights.errors import (CoprimalityViolated, DuplicatePrime,
                            NonMinimalModel, OutsideCone, ValidationError)
from heights.families import (BrieskornPhamSpec, CongruenceSemigroup,
                              EllipticCurveData, brieskorn_pham_analyze,
                              build_p1_fs, build_p2_blowup_family,
                              curve_from_label, curve_periods,
                              dedekind_eta, elliptic_faltings_height,
                              faltings_to_hk, hypersurface_lengths,
                              multiplicity_from_lengths)
from heights.functionals import (aubin_I_rel, aubin_J_rel,
                                 decomposition_check, modular_height,
                                 na_scalar_curvature,
                                 relative_modular_height)
from heights.heightvalue import HeightValue
from heights.toric import (barycentric_log_discrepancy,
                           blowup_family_oracle, toric_log_discrepancy)


# -- P^1 ----------------------------------------------------------------

def test_p1_closed_forms():
    m = build_p1_fs()
    hk = modular_height(m)
    assert hk.const_part == -1
    assert hk.evaluate() == pytest.approx(math.log(2 * math.pi) - 1,
                                          abs=1e-14)
    assert m.form.value(("L", "L")).exact_eq(HeightValue(Fraction(1, 2)))
    assert m.Sbar() == 2
    snA = na_scalar_curvature(m, 2)
    assert snA == {"fiber": Fraction(2)}


# -- blow-up family ------------------------------------------------------

def test_blowup_relative_height_constant():
    cs = {}
    for primes in [(2,), (3,), (2, 3, 5)]:
        pair = build_p2_blowup_family(primes)
        rel = relative_modular_height(pair.model, pair.ref)
        assert rel.const_part == 0 and rel.real_exact
        assert set(rel.log_terms) == set(primes)
        for p in primes:
            cs.setdefault("c", rel.log_terms[p])
            assert rel.log_terms[p] == cs["c"]
    assert cs["c"] == -32


def test_blowup_matches_toric_oracle():
    orc = blowup_family_oracle(2)
    assert orc["delta_hk"] == -32
    assert orc["delta_L3"] == -20 and orc["delta_L2K"] == 12
    # sign flip at twist 1
    assert blowup_family_oracle(1)["delta_hk"] == 32


def test_blowup_decomposition_and_aubin():
    pair = build_p2_blowup_family((2, 5))
    lhs, rhs = decomposition_check(pair)
    assert (lhs - rhs).is_zero(0.0)
    I = aubin_I_rel(pair)
    J = aubin_J_rel(pair)
    assert I.log_terms == {2: Fraction(16), 5: Fraction(16)}
    assert J.log_terms == {2: Fraction(20, 3), 5: Fraction(20, 3)}
    # 0 <= I/(n+1) <= J <= n I/(n+1), n = 2
    iv, jv = I.evaluate(), J.evaluate()
    assert 0 <= iv / 3 <= jv <= 2 * iv / 3


def test_blowup_fiber_degrees():
    pair = build_p2_blowup_family((3,))
    s = na_scalar_curvature(pair.model, 3)
    assert s == {"exc": Fraction(5, 4)}


def test_blowup_duplicate_prime_rejected():
    with pytest.raises(DuplicatePrime):
        build_p2_blowup_family((2, 2))


# -- toric discrepancies --------------------------------------------------

def test_log_discrepancy_smooth_cone():
    rays = [(1, 0), (0, 1)]
    assert toric_log_discrepancy(rays, (1, 1)) == 1
    assert toric_log_discrepancy(rays, (2, 3)) == 4
    assert barycentric_log_discrepancy(rays, (2, 3)) == 4


def test_log_discrepancy_quotient_cone():
    # 1/3(1,1): N = Z^2 + Z(1/3, 1/3); ray generators stay e1, e2
    rays = [(1, 0), (0, 1)]
    v = (Fraction(1, 3), Fraction(1, 3))
    assert toric_log_discrepancy(rays, v) == Fraction(-1, 3)


def test_log_discrepancy_outside_cone():
    with pytest.raises(OutsideCone):
        toric_log_discrepancy([(1, 0), (0, 1)], (-1, 2))


# -- Brieskorn-Pham -------------------------------------------------------

def test_spec_validation():
    with pytest.raises(CoprimalityViolated):
        BrieskornPhamSpec((4, 6, 7), 5)
    with pytest.raises(CoprimalityViolated):
        BrieskornPhamSpec((8, 15, 7), 7)
    with pytest.raises(ValidationError):
        BrieskornPhamSpec((2, 3, 5), 7)   # exponent 2 <= n


def test_half_1_1_multiplicity():
    sg = CongruenceSemigroup((1, 1), 2)
    mult, stable = multiplicity_from_lengths(sg.lengths(10), 2)
    assert stable and mult == 2


def test_hypersurface_multiplicity_exact():
    for D in range(2, 13):
        lens = hypersurface_lengths(3, D, D + 5)
        mult, stable = multiplicity_from_lengths(lens, 2)
        assert stable and mult == D


def test_destabilizing_spec():
    rep = brieskorn_pham_analyze(BrieskornPhamSpec((8, 15, 7), 11))
    assert rep["chart"] == "1/7(1,1)"
    assert rep["multiplicity"] == 7 and rep["stable"]
    assert rep["threshold"] == 6 and rep["destabilizing"]
    assert all(v >= -1 for v in rep["log_discrepancies"].values())
    assert rep["klt"]


def test_stable_spec_not_flagged():
    rep = brieskorn_pham_analyze(BrieskornPhamSpec((3, 4, 5), 7))
    # chart 1/5(3,4): multiplicity stays at or below the threshold
    assert rep["multiplicity"] <= 6 or not rep["destabilizing"]


# -- elliptic curves -------------------------------------------------------

def test_discriminant_validation():
    E = curve_from_label("37a1")
    assert E.discriminant() == 37
    with pytest.raises(NonMinimalModel):
        EllipticCurveData((0, 0, 1, -1, 0), 38)
    with pytest.raises(ValidationError):
        curve_from_label("99z9")


@pytest.mark.parametrize("label", ["37a1", "11a1", "389a1", "5077a1"])
def test_two_paths_agree(label):
    E = curve_from_label(label)
    hq = elliptic_faltings_height(E, "qexp")
    ha = elliptic_faltings_height(E, "agm")
    assert hq == pytest.approx(ha, abs=1e-8)


@pytest.mark.parametrize("label", ["37a1", "11a1"])
def test_agm_periods_match_quadrature(label):
    E = curve_from_label(label)
    per = curve_periods(E)
    b2, b4, b6, _ = E.b_invariants()

    def f(x):
        return 4 * x ** 3 + b2 * x ** 2 + 2 * b4 * x + b6

    roots = mpmath.polyroots([4, b2, 2 * b4, b6])
    reals = sorted((mpmath.re(r) for r in roots
                    if abs(mpmath.im(r)) < 1e-10), reverse=True)
    e_top = reals[0]
    w1 = 2 * mpmath.quad(
        lambda x: mpmath.re(1 / mpmath.sqrt(mpmath.mpc(f(x)))),
        [e_top, mpmath.inf])
    assert per["omega1"].real == pytest.approx(float(w1), abs=1e-8)
    if E.delta_min > 0:
        w2 = 2 * mpmath.quad(
            lambda x: mpmath.re(1 / mpmath.sqrt(mpmath.mpc(-f(x)))),
            [-mpmath.inf, reals[-1]])
        assert abs(per["omega2"].imag) == pytest.approx(float(w2), abs=1e-8)
    else:
        nu = 2 * mpmath.quad(
            lambda x: mpmath.re(1 / mpmath.sqrt(mpmath.mpc(-f(x)))),
            [-mpmath.inf, e_top])
        assert 2 * per["omega2"].imag == pytest.approx(float(nu), abs=1e-8)


def test_eta_terms_guard():
    E = curve_from_label("37a1")
    with pytest.raises(ValidationError):
        elliptic_faltings_height(E, "qexp", eta_terms=10)
    from heights.errors import BadTau
    with pytest.raises(BadTau):
        dedekind_eta(1 - 2j)


def test_faltings_bridge_formula():
    h = -0.5
    assert faltings_to_hk(h, 1) == pytest.approx(-1.0)
    assert faltings_to_hk(h, 4) == pytest.approx(
        8 * (-0.5 + 0.5 * math.log(4)))
    with pytest.raises(ValidationError):
        faltings_to_hk(h, 0)


def test_tau_in_fundamental_strip_sense():
    for label in ("37a1", "11a1"):
        per = curve_periods(curve_from_label(label))
        assert per["tau"].imag > 0
        assert per["area"] > 0
