"""Tests for exact rationals and capped-precision p-adic approximations."""

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from etadelta.exactnum import (DiffValuation, PadicApprox,
                               padic_valuation_of_difference,
                               rational_from_parts, vp_fraction, vp_int)

PRIMES = (2, 3, 5, 7, 11, 13)


def test_rational_from_parts_reduces():
    assert rational_from_parts(6, -4) == Fraction(-3, 2)
    with pytest.raises(ValueError):
        rational_from_parts(1, 0)


def test_vp_int():
    assert vp_int(250, 5) == 3
    assert vp_int(-250, 5) == 3
    assert vp_int(7, 5) == 0
    with pytest.raises(ValueError):
        vp_int(0, 5)


def test_vp_fraction():
    assert vp_fraction(Fraction(250, 7), 5) == 3
    assert vp_fraction(Fraction(7, 25), 5) == -2
    assert vp_fraction(0, 5) is None


def test_from_rational_roundtrip():
    x = Fraction(-44, 25)
    a = PadicApprox.from_rational(x, 5, 8)
    assert a.valuation == -2
    # x = 5^-2 * (-44), so the unit is -44 mod 5^8
    assert (a.unit + 44) % 5 ** 8 == 0


def test_zero_absorbs():
    z = PadicApprox.zero(5, 6)
    a = PadicApprox.from_rational(Fraction(7), 5, 10)
    assert (z + a).residue(6) == 7
    assert (z * a).is_zero
    assert z.abs_precision == 6


def test_cancellation_is_tracked():
    a = PadicApprox.from_rational(Fraction(7), 5, 4)
    b = PadicApprox.from_rational(Fraction(7 + 5 ** 4), 5, 4)
    d = a - b
    # the difference is 5^4, invisible at precision 4: a certified capped zero
    assert d.is_zero and d.abs_precision == 4


def test_diff_valuation_saturation():
    a = PadicApprox.from_rational(Fraction(3), 5, 4)
    b = PadicApprox.from_rational(Fraction(3), 5, 4)
    assert padic_valuation_of_difference(a, b) == DiffValuation(4, True)
    c = PadicApprox.from_rational(Fraction(3 + 25), 5, 8)
    assert padic_valuation_of_difference(a, c) == DiffValuation(2, False)
    assert str(DiffValuation(4, True)) == ">=4"


def test_residue_guards():
    a = PadicApprox.from_rational(Fraction(1, 5), 5, 4)
    with pytest.raises(ValueError):
        a.residue()
    b = PadicApprox.from_rational(Fraction(50), 5, 3)
    with pytest.raises(ValueError):
        b.residue(b.abs_precision + 1)
    assert b.residue() == 50 % 5 ** b.abs_precision


rationals = st.fractions(min_value=-1000, max_value=1000, max_denominator=60)


@given(rationals, rationals, st.sampled_from(PRIMES))
def test_arithmetic_matches_rationals(x, y, p):
    """Add/sub/mul agree with exact rational arithmetic mod p^M."""
    M = 10
    ax = PadicApprox.from_rational(x, p, M)
    ay = PadicApprox.from_rational(y, p, M)
    for op, rop in (((ax + ay), x + y), ((ax - ay), x - y), ((ax * ay), x * y)):
        exact = PadicApprox.from_rational(rop, p, M)
        cap = min(op.abs_precision, exact.abs_precision)
        if cap <= 0:
            continue
        d = padic_valuation_of_difference(op._truncate_abs(cap),
                                          exact._truncate_abs(cap))
        assert d.saturated or d.value >= cap


@given(rationals, st.sampled_from(PRIMES))
def test_negation_involution(x, p):
    a = PadicApprox.from_rational(x, p, 8)
    assert -(-a) == a
