from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from thetaforms.scalars import I, ONE, PI, SQRT2, TWO_PI_I, ZERO, Scalar, field, sqrt2_power

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=6)
scalars = st.builds(
    lambda terms: Scalar({k: v for k, v in terms}),
    st.lists(st.tuples(st.integers(-2, 2), st.tuples(rationals, rationals, rationals, rationals)), max_size=3),
)


def test_addition_examples():
    assert field(1, 1) + field(1, -1) == field(2)
    assert PI + ZERO == PI
    half = SQRT2 * PI.inv()
    assert half + half == field(0, 0, 2, pi_power=-1)


def test_multiplication_examples():
    assert field(1, 1) * field(1, -1) == field(2)
    assert SQRT2 * SQRT2 == field(2)
    assert TWO_PI_I.inv() * TWO_PI_I == ONE


def test_inverse():
    assert TWO_PI_I.inv() == field(0, Fraction(-1, 2), pi_power=-1)
    assert ONE.inv() == ONE
    with pytest.raises(ZeroDivisionError):
        ZERO.inv()
    with pytest.raises(ValueError):
        (PI + ONE).inv()


def test_sqrt2_powers():
    assert sqrt2_power(2) == field(2)
    assert sqrt2_power(-1) * SQRT2 == ONE
    assert sqrt2_power(-3) == field(0, 0, Fraction(1, 4))


def test_rendering_is_canonical():
    assert str(field(0, Fraction(3, 2), pi_power=-1) + SQRT2) == "3/2*i*pi^-1 + sqrt2"
    assert str(ZERO) == "0"
    assert str(-I) == "-i"


def test_zero_is_empty_mapping():
    x = SQRT2 * I - I * SQRT2
    assert x.is_zero() and not x.terms


def test_to_complex():
    assert abs(TWO_PI_I.to_complex() - 2j * 3.141592653589793) < 1e-12


@given(scalars, scalars, scalars)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a
    assert a - a == ZERO


@given(scalars)
def test_equality_matches_hash(a):
    b = Scalar(a.terms)
    assert a == b and hash(a) == hash(b)
