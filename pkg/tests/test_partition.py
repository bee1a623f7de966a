from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from finhall.partition import (
    DEFECT_NOTE,
    NU_NOTE,
    integrate,
    partition_report,
    riedtmann_audit,
    series_box,
    single_sided_grades,
)
from finhall.quiver import Rep
from finhall.series import ConeClass, mul, sign_twist

from conftest import algebra_for


def test_integrate_unit_is_one(model):
    s = integrate(model.unit())
    assert s.constant_term == 1 and len(s.support()) == 1


def test_integrate_product_example(a2):
    cat = a2.catalog
    S1, S2 = cat.classes_at((1, 0))[0], cat.classes_at((0, 1))[0]
    s = integrate(a2.delta(S2) * a2.delta(S1))
    # 1/|Aut P1| + 1/|Aut(S1+S2)| = 1 + 1 at q = 2, sitting at theta(1,1) = 0
    assert s.coefficient((1, 1), 0) == 2
    assert s.grade((1, 1)) == {0: Fraction(2)}


def test_integrate_weights_by_automorphisms(a2q3):
    cat = a2q3.catalog
    split = cat.classify(Rep((1, 1), (np.array([[0]]),)))
    assert split.aut_order == 4
    assert integrate(a2q3.delta(split)).coefficient((1, 1), 0) == Fraction(1, 4)
    S2 = cat.classes_at((0, 1))[0]
    assert integrate(a2q3.delta(S2)).coefficient((0, 1), 1) == Fraction(1, 2)


@settings(max_examples=30, deadline=None)
@given(st.dictionaries(st.sampled_from(sorted(algebra_for("A2", 2).catalog.classes)), st.integers(-4, 4), max_size=5),
       st.dictionaries(st.sampled_from(sorted(algebra_for("A2", 2).catalog.classes)), st.integers(-4, 4), max_size=5),
       st.integers(-3, 3))
def test_integrate_is_linear(u, v, k):
    alg = algebra_for("A2", 2)
    a, b = alg.element(u), alg.element(v)
    assert integrate(a + b.scale(k)) == integrate(a) + integrate(b).scale(k)


def test_series_box_holds_every_class(model):
    box = series_box(model)
    theta_of = model.stability.data.theta_of
    for G in model.catalog:
        assert ConeClass(G.dims, theta_of(G.dims)) in box


def test_riedtmann(model):
    rep = riedtmann_audit(model)
    assert rep.passed, rep.summary()
    assert rep.entries[-1]["witness"]["pairs"] > 0


def test_defect_rules(model):
    rep = partition_report(model)
    assert rep.defect == rep.recomputed_defect()
    assert rep.defect.constant_term == 0
    vr = rep.vanishing_report()
    assert vr.passed, vr.summary()
    assert set(rep.single_sided) == set(single_sided_grades(model))


def test_defect_is_reported_on_mixed_grades(a2):
    rep = partition_report(a2)
    nonzero = rep.vanishing_report().info["nonzero_defect_grades"]
    assert [1, 1] in nonzero
    assert rep.defect_at((1, 1))


def test_sign_twist(a2):
    plain, twisted = partition_report(a2), partition_report(a2, sign_twisted=True)
    assert twisted.dt == sign_twist(plain.dt)
    assert twisted.defect == sign_twist(plain.defect)
    assert mul(sign_twist(plain.dt_exc), sign_twist(plain.tp)) == sign_twist(mul(plain.dt_exc, plain.tp))


def test_table(a2):
    text = partition_report(a2).table()
    lines = text.splitlines()
    assert lines[0] == f"# {NU_NOTE}" and lines[1] == f"# {DEFECT_NOTE}"
    assert lines[3].split() == ["beta", "n", "DT", "DT_exc", "TP", "defect"]
    assert any(line.split()[:2] == ["0,0", "0"] for line in lines[4:])
