from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from coupontable.powersum import PowerSum, RationalPowerSum, compare, to_fraction

n = PowerSum.n()
r = PowerSum.monomial(1, Fraction(1, 2))
q = PowerSum.monomial(1, Fraction(1, 4))


def test_cancellation_is_exact():
    assert (n - q - r) + q + r == n
    assert (n - r) - n == -r


def test_product_and_leading():
    expr = (n - r) * (n - r)
    assert expr.leading() == (2, 1)
    assert expr.coefficient(Fraction(3, 2)) == -2
    assert expr.coefficient(1) == 1


def test_compare_orders_by_growth():
    assert compare(q, r) == -1
    assert compare(n - r, n - q - r) == 1
    assert compare(r, r) == 0
    assert compare(PowerSum.monomial(Fraction(1, 2), 1), n - r) == -1


def test_round_half_up_exact_powers():
    assert r.round_half_up(10**4) == 100
    assert (n - r).round_half_up(10**4) == 9900
    assert q.round_half_up(10**4) == 10


def test_round_half_up_irrational():
    # 10^(6/4) = 1000 * sqrt(10) ~ 31.62; checked against mpmath at 50 digits
    assert q.round_half_up(10**6) == 32
    assert (n - q - r).round_half_up(10**6) == 10**6 - 32 - 1000


def test_round_half_up_tie_goes_up():
    half = PowerSum.monomial(Fraction(1, 2), 1)
    assert half.round_half_up(5) == 3
    assert (half + Fraction(-1, 2)).round_half_up(4) == 2  # 1.5 -> 2


def test_format():
    assert str(n - q - r) == "n - n^(1/2) - n^(1/4)"
    assert str(-n + q + 3 * r) == "-n + 3*n^(1/2) + n^(1/4)"
    assert str(PowerSum()) == "0"


def test_to_fraction():
    assert to_fraction(0.25) == Fraction(1, 4)
    assert to_fraction("1/3") == Fraction(1, 3)
    assert to_fraction(0.3333333333333333, 1000) == Fraction(1, 3)
    with pytest.raises(TypeError):
        to_fraction(True)


def test_rational_leading():
    one = PowerSum.constant(1)
    ratio = RationalPowerSum(n * n, n - one)
    assert ratio.leading() == (1, 1)
    assert RationalPowerSum(PowerSum(), n).leading() is None


exponents = st.fractions(min_value=0, max_value=1, max_denominator=8)
coeffs = st.fractions(min_value=-3, max_value=3, max_denominator=6)
sums = st.lists(st.tuples(exponents, coeffs), max_size=4).map(PowerSum)


@given(sums, sums, sums)
def test_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) * c == a * c + b * c
    assert (a - a).is_zero()


@given(sums, st.integers(min_value=2, max_value=10**6))
def test_evaluation_is_additive(a, value):
    b = PowerSum.monomial(1, Fraction(1, 2))
    assert abs(float((a + b).evaluate(value)) - float(a.evaluate(value)) - float(b.evaluate(value))) < 1e-6 * (1 + value)
