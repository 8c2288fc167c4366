"""Models, forms, pairs and the exact functionals on them."""

import json
from fractions import Fraction

import pytest

from heights.errors import (IncompleteJointForm, MissingGenericDegree,
                            NonPrimeLabel, UnknownComponent, UnknownPrime,
                            ValidationError, ZeroCoverDegree)
from heights.heightvalue import HeightValue, ZERO
from heights.intersection import (DivisorClassId, FiberComponent, FormalSum,
                                  IntersectionModel, ModelPair, SymmetricForm,
                                  form_key)
from heights.functionals import (component_twist_derivative, modular_height,
                                 na_calabi, na_scalar_curvature,
                                 normalized_df, normalized_df_twisted,
                                 relative_modular_height,
                                 rescale_metric_const,
                                 slope_semistability_test,
                                 twist_by_base_divisor)


def simple_model(a=Fraction(1, 2), b=Fraction(-1), c=Fraction(2)):
    form = SymmetricForm(2, {("L", "L"): HeightValue(a),
                             ("L", "K"): HeightValue(b),
                             ("K", "K"): HeightValue(c)})
    return IntersectionModel(
        n=1, degree_KQ=1,
        classes=(DivisorClassId("L", "polarization"),
                 DivisorClassId("K", "relative-canonical")),
        form=form, L_class="L", K_class="K",
        deg_Ln=Fraction(1), deg_LK=Fraction(-2))


def test_form_pairing_is_multilinear():
    form = SymmetricForm(2, {("L", "L"): HeightValue(2),
                             ("L", "K"): HeightValue(3),
                             ("K", "K"): HeightValue(5)})
    s = FormalSum({"L": Fraction(2), "K": Fraction(-1)})
    v = form.pair(s, s)
    # 4*2 - 4*3 + 1*5
    assert v.exact_eq(HeightValue(4 * 2 - 4 * 3 + 5))


def test_form_missing_monomial_raises():
    form = SymmetricForm(2, {("L", "L"): ZERO})
    with pytest.raises(IncompleteJointForm):
        form.value(("L", "K"))


def test_model_requires_total_form():
    form = SymmetricForm(2, {("L", "L"): ZERO, ("L", "K"): ZERO})
    with pytest.raises(IncompleteJointForm):
        IntersectionModel(
            n=1, degree_KQ=1,
            classes=(DivisorClassId("L", "polarization"),
                     DivisorClassId("K", "relative-canonical")),
            form=form, L_class="L", K_class="K",
            deg_Ln=Fraction(1), deg_LK=Fraction(-2))


def test_vertical_class_needs_prime():
    with pytest.raises(NonPrimeLabel):
        DivisorClassId("E", "vertical", prime=6, component_id="c")


def test_fiber_component_validation():
    with pytest.raises(ValidationError):
        FiberComponent(2, "c", Fraction(0), Fraction(1))
    with pytest.raises(NonPrimeLabel):
        FiberComponent(4, "c", Fraction(1), Fraction(1))


def test_modular_height_formula():
    m = simple_model()
    # h_K = -1*(-2)*(LL) + 2*1*(LK) = 2*(1/2) + 2*(-1) = -1
    assert modular_height(m).exact_eq(HeightValue(-1))


def test_generic_degree_rules():
    m = simple_model()
    assert m.generic_degree(["L"]) == 1
    assert m.generic_degree(["K"]) == -2
    with pytest.raises(MissingGenericDegree):
        m2 = IntersectionModel(
            n=2, degree_KQ=1,
            classes=(DivisorClassId("L", "polarization"),
                     DivisorClassId("K", "relative-canonical")),
            form=SymmetricForm(3, {k: ZERO for k in
                                   [("L",) * 3, ("L", "L", "K"),
                                    ("L", "K", "K"), ("K",) * 3]}),
            L_class="L", K_class="K", deg_Ln=Fraction(8),
            deg_LK=Fraction(-8))
        m2.generic_degree(["K", "K"])


def test_serialization_roundtrip(tmp_path):
    m = simple_model()
    p = tmp_path / "m.json"
    m.save(p)
    m2 = IntersectionModel.load(p)
    for k, v in m.form.entries.items():
        assert m2.form.value(k).exact_eq(v) or m2.form.value(k).close_to(v)
    assert m2.deg_Ln == m.deg_Ln and m2.deg_LK == m.deg_LK


def test_bad_model_json_rejects_composite_prime(tmp_path):
    m = simple_model()
    obj = m.to_json()
    obj["form"]["K,L"] = {"const": "0", "logs": {"6": "1"}, "real": 0.0,
                          "real_exact": True}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(obj))
    with pytest.raises(NonPrimeLabel):
        IntersectionModel.load(p)


def test_twist_by_base_divisor_preserves_hk():
    m = simple_model()
    tw = twist_by_base_divisor(m, {2: Fraction(3), 5: Fraction(-1, 2)})
    assert modular_height(tw).exact_eq(modular_height(m))
    # but the energy changes
    assert not tw.form.value(("L", "L")).exact_eq(m.form.value(("L", "L")))


def test_rescale_metric_const_preserves_hk():
    m = simple_model()
    rs = rescale_metric_const(m, 1.75)
    assert abs((modular_height(rs) - modular_height(m)).evaluate()) < 1e-12


def test_cover_degree_zero_rejected():
    m = simple_model()
    with pytest.raises(ZeroCoverDegree):
        normalized_df(m, 0)


def two_component_model(dL=(2, 3), dK=(-1, -4), prime=7):
    """n = 1 arithmetic surface with a two-component fiber at `prime`."""
    lp = lambda c: HeightValue(log_terms={prime: Fraction(c)})
    names = ["L", "K", "E1", "E2"]
    entries = {
        ("L", "L"): HeightValue(Fraction(3)),
        ("K", "L"): HeightValue(Fraction(-2)),
        ("K", "K"): HeightValue(Fraction(1)),
        ("E1", "L"): lp(dL[0]), ("E2", "L"): lp(dL[1]),
        ("E1", "K"): lp(dK[0]), ("E2", "K"): lp(dK[1]),
        ("E1", "E1"): lp(-dL[0]), ("E2", "E2"): lp(-dL[1]),
        ("E1", "E2"): lp(dL[0]),
    }
    classes = (DivisorClassId("L", "polarization"),
               DivisorClassId("K", "relative-canonical"),
               DivisorClassId("E1", "vertical", prime, "c1"),
               DivisorClassId("E2", "vertical", prime, "c2"))
    fibers = (FiberComponent(prime, "c1", Fraction(dL[0]), Fraction(dK[0])),
              FiberComponent(prime, "c2", Fraction(dL[1]), Fraction(dK[1])))
    return IntersectionModel(
        n=1, degree_KQ=1, classes=classes,
        form=SymmetricForm(2, {form_key(k): v for k, v in entries.items()}),
        L_class="L", K_class="K",
        deg_Ln=Fraction(sum(dL)), deg_LK=Fraction(sum(dK)), fibers=fibers)


def test_na_scalar_curvature_per_component():
    m = two_component_model()
    s = na_scalar_curvature(m, 7)
    assert s == {"c1": Fraction(1, 2), "c2": Fraction(4, 3)}
    with pytest.raises(UnknownPrime):
        na_scalar_curvature(m, 11)


def test_na_calabi_sum():
    m = two_component_model()
    assert na_calabi(m, [7]) == Fraction(1, 4) + Fraction(16, 9)


def test_twist_derivative_matches_eps_grid():
    m = two_component_model()
    d = component_twist_derivative(m, 7, "c1")
    eps = Fraction(1, 100)
    up = normalized_df_twisted(m, "E1", eps)
    dn = normalized_df_twisted(m, "E1", -eps)
    central = (up - dn).scale(Fraction(1, 2) / eps)
    assert central.exact_eq(d)
    with pytest.raises(UnknownComponent):
        component_twist_derivative(m, 7, "missing")


def test_twist_derivative_vanishes_iff_constant_snA():
    flat = two_component_model(dL=(2, 3), dK=(-4, -6))   # S = 2 on both
    for comp in ("c1", "c2"):
        assert component_twist_derivative(flat, 7, comp).is_zero(0.0)
    bent = two_component_model(dL=(2, 3), dK=(-4, -5))
    assert not all(component_twist_derivative(bent, 7, c).is_zero(0.0)
                   for c in ("c1", "c2"))


def test_slope_semistability_verdicts():
    # lhs = -2 b/a compared against Sbar = 2
    eq = simple_model(a=Fraction(1), b=Fraction(-1))
    assert slope_semistability_test(eq) == "equality"
    st = simple_model(a=Fraction(1), b=Fraction(-1, 2))
    assert slope_semistability_test(st) == "stable-direction"
    bad = simple_model(a=Fraction(1), b=Fraction(-3))
    assert slope_semistability_test(bad) == "violated"


def test_model_pair_rejects_mismatched_joint_form():
    m = simple_model()
    ref = simple_model()
    joint = SymmetricForm(2, {("L", "L"): HeightValue(Fraction(1, 2)),
                              ("K", "L"): HeightValue(-1),
                              ("K", "K"): HeightValue(2),
                              ("L", "Lr"): ZERO, ("K", "Lr"): ZERO,
                              ("Lr", "Lr"): HeightValue(99),  # wrong
                              ("Kr", "Lr"): HeightValue(-1),
                              ("K", "Kr"): ZERO, ("L", "Kr"): ZERO,
                              ("Kr", "Kr"): HeightValue(2)})
    with pytest.raises(ValidationError):
        ModelPair(model=m, ref=ref, joint_form=joint,
                  ref_map={"L": "Lr", "K": "Kr"})


def test_relative_height_needs_same_generic_fiber():
    from heights.errors import GenericFiberMismatch
    m = simple_model()
    other = IntersectionModel(
        n=1, degree_KQ=1, classes=m.classes, form=m.form,
        L_class="L", K_class="K", deg_Ln=Fraction(2), deg_LK=Fraction(-2))
    with pytest.raises(GenericFiberMismatch):
        relative_modular_height(m, other)
