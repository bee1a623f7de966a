from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from finhall.catalog import Catalog
from finhall.errors import DomainError, ModelViolation, TorsionPairViolation
from finhall.oracles import hn_filtrations_exhaustive
from finhall.quiver import Rep, a2_model, model_from_dict
from finhall.stability import (
    HALF_INF,
    INF,
    INFINITY,
    ClassSet,
    Perp,
    SerreSupport,
    SlopeInterval,
    SlopeValue,
    StabilityData,
    StabilityModel,
)

A2_DATA = StabilityData((-1, 1), (1, 0), (1, 1))


def named(alg):
    cat = alg.catalog
    S1, S2 = cat.classes_at((1, 0))[0], cat.classes_at((0, 1))[0]
    P1 = cat.classify(Rep((1, 1), (np.array([[1]]),)))
    return cat, alg.stability, S1, S2, P1


def test_slope_values_and_constants():
    assert A2_DATA.slope((0, 1)) == SlopeValue(INF, 1)
    assert A2_DATA.slope((0, 1)) >= HALF_INF
    assert A2_DATA.slope((1, 0)) == SlopeValue(-1, -1)
    assert HALF_INF < INFINITY
    assert SlopeValue(10**9, 0) < HALF_INF
    assert SlopeValue(INF, -1) < HALF_INF < SlopeValue(INF, Fraction(1, 2))
    assert INFINITY.first is INF and not isinstance(INF, float)
    with pytest.raises(DomainError):
        A2_DATA.slope((0, 0))


@given(st.tuples(st.integers(0, 6), st.integers(0, 6)).filter(any), st.integers(2, 5))
def test_slope_scale_invariance(d, k):
    assert A2_DATA.slope(d) == A2_DATA.slope(tuple(k * x for x in d))


def test_semistability_examples(a2):
    cat, st_, S1, S2, P1 = named(a2)
    assert st_.is_semistable(S1) and st_.is_semistable(S2)
    assert not st_.is_semistable(P1)
    assert st_.is_semistable(cat.classes_at((2, 0))[0])


def test_both_semistability_criteria_agree(model):
    assert model.stability.semistability_criteria_report().passed


def test_hn_of_p1(a2):
    cat, st_, S1, S2, P1 = named(a2)
    filt = st_.hn(P1)
    assert [s.dims for s in filt.steps] == [(0, 1), (1, 1)]
    assert filt.quotients == (S2.id, S1.id)
    assert filt.slopes == (SlopeValue(INF, 1), SlopeValue(-1, -1))
    assert st_.hn(S1).steps[-1].dims == (1, 0) and st_.hn(S1).length == 1


def test_hn_matches_exhaustive_oracle(model):
    st_ = model.stability
    checked = 0
    for G in model.catalog:
        if G.is_zero or G.total_dim > 4:
            continue
        chains = hn_filtrations_exhaustive(st_, G)
        filt = st_.hn(G)
        assert len(chains) == 1, G.id
        assert chains[0] == (tuple(s.dims for s in filt.steps), filt.quotients, filt.slopes)
        checked += 1
    assert checked > 10


def test_hn_tie_is_an_error():
    """A slope making the three lines of S2+S2 equally destabilizing must raise."""
    cat = Catalog(model_from_dict(a2_model(2, total_max=2)))
    slopes = {(0, 1): SlopeValue(1, 0), (0, 2): SlopeValue(0, 0)}
    model = StabilityModel(cat, slope_fn=lambda d: slopes.get(d, SlopeValue(-5, 0)))
    with pytest.raises(ModelViolation):
        model.hn(cat.classes_at((0, 2))[0])


def test_torsion_split_examples(a2):
    cat, st_, S1, S2, P1 = named(a2)
    P, Q = st_.serre_pair()
    assert st_.torsion_split(P1, P, Q) == (S2.id, S1.id)
    assert st_.torsion_split(S2, P, Q) == (S2.id, cat.zero.id)
    assert st_.torsion_split(S1, P, Q) == (cat.zero.id, S1.id)
    with pytest.raises(TorsionPairViolation):
        st_.torsion_split(P1, ClassSet(frozenset({S1.id})), ClassSet(frozenset({S2.id})))


def test_torsion_pairs_validate(model):
    st_ = model.stability
    assert st_.validate_torsion_pair(*st_.serre_pair()).passed
    assert st_.validate_torsion_pair(*st_.slope_pair()).passed
    assert st_.threshold_pairs_report().passed


def test_torsion_negative_control(a2):
    cat, st_, S1, S2, P1 = named(a2)
    P = ClassSet(frozenset({P1.id}))
    rep = st_.validate_torsion_pair(P, Perp(P))
    bad = {e["check"] for e in rep.failures}
    assert "P-quotient-closed" in bad
    assert any(e["object"] == P1.id and e["check"] == "P-quotient-closed" for e in rep.failures)


def test_membership_conventions(a2):
    cat, st_, S1, S2, P1 = named(a2)
    zero = cat.zero
    for spec in (SerreSupport(frozenset({1})), SlopeInterval.at_least(HALF_INF), SlopeInterval.below(HALF_INF),
                 SlopeInterval.exactly(SlopeValue(7, 7))):
        assert st_.contains(spec, zero)
    assert not st_.contains(SlopeInterval.below(HALF_INF), S2)
    assert st_.contains(SlopeInterval.below(HALF_INF), S1)


def test_seesaw_and_hom_slope(model):
    st_ = model.stability
    assert st_.seesaw_audit().passed
    assert st_.hom_slope_check().passed
    assert st_.endpoint_slopes_report().passed


def test_hom_slope_example(a2):
    cat, st_, S1, S2, P1 = named(a2)
    assert st_.slope(S2.dims) > st_.slope(S1.dims) and cat.hom_dim(S2, S1) == 0


def test_seesaw_negative_control(a2):
    corrupt = StabilityModel(a2.catalog, slope_fn=lambda d: SlopeValue(sum(d), 0))
    rep = corrupt.seesaw_audit()
    assert not rep.passed
    assert any(e["object"].startswith("1.1:") for e in rep.failures)


def test_pqss(model):
    assert model.stability.compare_pqss().passed


def test_pqss_negative_control():
    data = a2_model(2, total_max=4)
    data["weights"]["theta"] = [-1, -1]
    cat = Catalog(model_from_dict(data, validate=False))
    st_ = StabilityModel(cat)
    assert st_.slope((0, 1)) == SlopeValue(INF, -1)
    rep = st_.compare_pqss()
    assert not rep.passed
    assert {e["object"] for e in rep.failures} >= {"0.1:0"}


def test_interval_closure(model):
    st_ = model.stability
    for mu in st_.realized_slopes():
        assert st_.interval_closure_report(SlopeInterval.exactly(mu)).passed
        assert st_.interval_closure_report(SlopeInterval.at_least(mu)).passed


def test_realized_slopes_descending(a2):
    mus = a2.stability.realized_slopes()
    assert mus == sorted(mus, reverse=True) and len(set(mus)) == len(mus)
    assert mus[0] == SlopeValue(INF, 1) and mus[-1] == SlopeValue(-1, -1)
