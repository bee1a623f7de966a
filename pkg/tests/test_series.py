import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from finhall.errors import BoxMismatchError, ConfigError, DomainError, NotInvertibleError
from finhall.series import (
    ConeClass,
    TruncatedSeries,
    TruncationBox,
    exp_series,
    invert,
    log_series,
    mul,
    sign_twist,
    validate_laurent,
)

BOX1 = TruncationBox((4,), n_min=-1, n_max=3)
BOX2 = TruncationBox((2, 2), n_min=-1, n_max=3)


def x(box, beta, n=None, coeff=1):
    if n is None:
        n = box.n_min * sum(beta)
    return TruncatedSeries.monomial(box, beta, n, coeff)


def naive_mul(a, b):
    """Independent oracle: convolve over every pair of box classes."""
    out = {}
    classes = list(a.box.classes())
    for ca in classes:
        for cb in classes:
            c = ca + cb
            if c in a.box:
                out[c] = out.get(c, 0) + a[ca] * b[cb]
    return TruncatedSeries(a.box, out)


def series_strategy(box, terms=5, unit=None):
    classes = list(box.classes())
    coeff = st.fractions(min_value=-3, max_value=3, max_denominator=4)

    @st.composite
    def build(draw):
        keys = draw(st.lists(st.sampled_from(classes), max_size=terms))
        coeffs = {k: draw(coeff) for k in keys}
        if unit is not None:
            coeffs[ConeClass.zero(box.rank)] = unit
        return TruncatedSeries(box, coeffs)

    return build()


# -- worked examples -------------------------------------------------------------------


def test_validate_laurent_examples():
    assert validate_laurent({ConeClass((1,), -3), ConeClass((1,), 5)})
    assert validate_laurent(set())
    assert not validate_laurent({ConeClass((-1,), 0)})


def test_difference_of_squares():
    box = TruncationBox((2, 1))
    one = TruncatedSeries.one(box)
    t = x(box, (1, 0))
    assert mul(one + t, one - t) == one - x(box, (2, 0))
    assert mul(one + t, one) == one + t


def test_box_mismatch_is_a_config_error():
    with pytest.raises(BoxMismatchError):
        mul(TruncatedSeries.one(BOX1), TruncatedSeries.one(TruncationBox((3,))))
    assert issubclass(BoxMismatchError, ConfigError)
    with pytest.raises(ConfigError):
        TruncatedSeries(BOX1, {ConeClass((5,), 0): 1})


def test_window_slides_with_degree():
    box = TruncationBox((3,), n_min=-2, n_max=1)
    assert ConeClass((2,), -4) in box and ConeClass((2,), -3) in box
    assert ConeClass((2,), -5) not in box and ConeClass((2,), -2) not in box
    with pytest.raises(ConfigError):
        TruncationBox((1,), n_max=-1)


def test_invert_examples():
    one = TruncatedSeries.one(BOX1)
    assert invert(one) == one
    g = x(BOX1, (1,))
    expected = one - g + mul(g, g) - mul(mul(g, g), g) + mul(mul(g, g), mul(g, g))
    assert invert(one + g) == expected
    with pytest.raises(NotInvertibleError):
        invert(g)


def test_exp_log_examples():
    zero, one = TruncatedSeries.zero(BOX1), TruncatedSeries.one(BOX1)
    assert exp_series(zero) == one
    assert log_series(one) == zero
    g = x(BOX1, (1,))
    e = exp_series(g)
    for k in range(5):
        assert e.coefficient((k,), -k) == Fraction(1, math.factorial(k))
    with pytest.raises(DomainError):
        exp_series(one)
    with pytest.raises(DomainError):
        log_series(one + one)


def test_sign_twist_examples():
    box = TruncationBox((1,), n_min=0, n_max=4)
    t = TruncatedSeries.monomial(box, (1,), 3)
    assert sign_twist(t) == -t
    one = TruncatedSeries.one(box)
    assert sign_twist(one).constant_term == 1


def test_serialization_roundtrip(tmp_path):
    s = TruncatedSeries(BOX2, {ConeClass((1, 0), 1): Fraction(3, 4), ConeClass((0, 0), 0): 1})
    path = tmp_path / "s.json"
    s.dump(path, name="s")
    assert TruncatedSeries.load(path) == s
    assert s.to_records()[0] == {"beta": [0, 0], "n": 0, "num": 1, "den": 1}


# -- properties ------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(series_strategy(BOX2), series_strategy(BOX2))
def test_mul_matches_naive_convolution(a, b):
    assert mul(a, b) == naive_mul(a, b)


@settings(max_examples=60, deadline=None)
@given(series_strategy(BOX2), series_strategy(BOX2), series_strategy(BOX2))
def test_ring_axioms(a, b, c):
    assert mul(mul(a, b), c) == mul(a, mul(b, c))
    assert mul(a, b) == mul(b, a)
    assert mul(a, b + c) == mul(a, b) + mul(a, c)


@settings(max_examples=40, deadline=None)
@given(series_strategy(BOX2, unit=Fraction(2, 3)))
def test_inverse_is_two_sided_and_involutive(a):
    inv = invert(a)
    one = TruncatedSeries.one(BOX2)
    assert mul(a, inv) == one and mul(inv, a) == one
    assert invert(inv) == a


@settings(max_examples=30, deadline=None)
@given(series_strategy(BOX2, unit=0), series_strategy(BOX2, unit=1))
def test_exp_log_roundtrip(a, b):
    assert log_series(exp_series(a)) == a
    assert exp_series(log_series(b)) == b


@settings(max_examples=40, deadline=None)
@given(series_strategy(BOX2), series_strategy(BOX2))
def test_sign_twist_is_an_involutive_algebra_map(a, b):
    assert sign_twist(sign_twist(a)) == a
    assert sign_twist(mul(a, b)) == mul(sign_twist(a), sign_twist(b))


@settings(max_examples=30, deadline=None)
@given(series_strategy(BOX2), series_strategy(BOX2))
def test_product_coefficient_depends_only_on_lower_classes(a, b):
    """Changing a and b at classes not below gamma leaves (ab)_gamma unchanged."""
    gamma = ConeClass((1, 1), 1)

    def below(c):
        return all(x <= y for x, y in zip(c.beta, gamma.beta)) and c.n - BOX2.n_min * c.degree <= gamma.n - BOX2.n_min * gamma.degree

    def trunc(s):
        return TruncatedSeries(s.box, {c: v for c, v in s.items() if below(c)})

    assert mul(a, b)[gamma] == mul(trunc(a), trunc(b))[gamma]
