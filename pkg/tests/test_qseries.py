"""Laurent series ring laws, operator identities, and serialization."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from etadelta.qseries import (RATIONAL, LaurentSeries, ModDomain,
                              OperatorContext, deserialize, hecke_Tl,
                              serialize)


def mk(terms, prec=30):
    return LaurentSeries(RATIONAL, terms, prec)


# -- deterministic basics --------------------------------------------------

def test_structure_and_truncation():
    s = mk({-2: 3, 0: Fraction(1, 2), 5: -1})
    assert s.n0 == -2
    assert s.coefficient(0) == Fraction(1, 2)
    assert s.coefficient(1) == 0
    with pytest.raises(ValueError):
        s.coefficient(30)
    assert s.truncate(5).items() == [(-2, 3), (0, Fraction(1, 2))]
    assert s.shift(2).items() == [(0, 3), (2, Fraction(1, 2)), (7, -1)]


def test_zero_series():
    z = LaurentSeries.zero(RATIONAL, 10)
    assert z.is_zero and z.n0 == 10
    with pytest.raises(ValueError):
        z.leading_term()


def test_mod_domain_storage():
    dom = ModDomain(5, 3)
    s = LaurentSeries(dom, {-1: 7, 2: 126}, 10)
    assert s.coefficient(2) == 1  # reduced mod 125
    assert s.items() == [(-1, 7), (2, 1)]
    t = LaurentSeries(dom, (-1, [7, 0, 0, 1]), 10)
    assert s == t


def test_domain_mismatch_rejected():
    a = mk({0: 1})
    b = LaurentSeries(ModDomain(5, 2), {0: 1}, 30)
    with pytest.raises(ValueError):
        a + b


def test_mul_known_product():
    a = mk({-1: 1, 0: 1}, 10)  # q^-1 + 1
    b = mk({1: 1, 2: -2}, 10)  # q - 2q^2
    assert (a * b).items() == [(0, 1), (1, -1), (2, -2)]


def test_principal_part():
    s = mk({-3: 1, -1: 2, 0: 5, 4: 1})
    assert s.principal_part().items() == [(-3, 1), (-1, 2), (0, 5)]


def test_eichler_and_D_inverse():
    s = mk({1: 3, 4: -8, 7: Fraction(1, 2)})
    e = s.eichler_integral(4)
    assert e.coefficient(4) == Fraction(-8, 64)
    assert e.apply_D(3) == s
    with pytest.raises(ValueError):
        mk({0: 1, 2: 1}).eichler_integral(4)


def test_eichler_mod_domain():
    dom = ModDomain(5, 4)
    s = LaurentSeries(dom, {1: 3, 2: 7}, 20)
    e = s.eichler_integral(4)
    assert (e.coefficient(2) * 8 - 7) % 5 ** 4 == 0
    bad = LaurentSeries(dom, {5: 1}, 20)
    with pytest.raises(ValueError):
        bad.eichler_integral(4)


def test_to_mod():
    s = mk({1: Fraction(1, 3), 2: -4})
    m = s.to_mod(ModDomain(5, 3))
    assert (3 * m.coefficient(1) - 1) % 125 == 0
    with pytest.raises(ValueError):
        mk({0: Fraction(1, 5)}).to_mod(ModDomain(5, 3))


def test_serialize_roundtrip():
    for s in (mk({-2: Fraction(3, 7), 5: -1}, 12),
              LaurentSeries(ModDomain(7, 2), {0: 3, 4: 48}, 9)):
        assert deserialize(serialize(s)) == s


def test_operator_context_chi():
    ctx = OperatorContext(4, 9)
    assert ctx.chi_value(2) == 1
    assert ctx.chi_value(3) == 0
    assert ctx.chi_value(12) == 0


# -- randomized property suites --------------------------------------------

coeffs = st.fractions(min_value=-50, max_value=50, max_denominator=12)
series_st = st.builds(
    mk,
    st.dictionaries(st.integers(min_value=-4, max_value=12), coeffs,
                    max_size=6),
    st.integers(min_value=15, max_value=40))


def agree(a, b):
    prec = min(a.prec, b.prec)
    return a.truncate(prec) == b.truncate(prec)


@settings(max_examples=120)
@given(series_st, series_st, series_st)
def test_ring_laws(a, b, c):
    assert agree(a + b, b + a)
    assert agree((a + b) + c, a + (b + c))
    assert agree(a * b, b * a)
    assert agree((a * b) * c, a * (b * c))
    assert agree(a * (b + c), a * b + a * c)


@settings(max_examples=120)
@given(series_st, series_st)
def test_D_is_a_derivation(a, b):
    assert agree((a * b).apply_D(), a.apply_D() * b + a * b.apply_D())


@settings(max_examples=120)
@given(series_st, st.sampled_from((2, 3, 5, 7)))
def test_up_vp_identity(a, p):
    assert a.apply_Vp(p).apply_Up(p) == a


@settings(max_examples=120)
@given(series_st, st.sampled_from(((2, 5), (2, 7), (5, 7), (2, 13), (5, 13))))
def test_hecke_commutativity(a, lpair):
    l1, l2 = lpair
    ctx = OperatorContext(4, 9)
    x = hecke_Tl(hecke_Tl(a, l1, ctx), l2, ctx)
    y = hecke_Tl(hecke_Tl(a, l2, ctx), l1, ctx)
    assert agree(x, y)


@settings(max_examples=120)
@given(series_st, st.sampled_from((2, 5, 7)))
def test_hecke_degenerates_to_up_at_level(a, l):
    """With chi(l) = 0 (l | N) the Hecke operator is U_l."""
    ctx = OperatorContext(4, 3 * l)
    assert hecke_Tl(a, l, ctx) == a.apply_Up(l)


def test_mod_mul_matches_rational():
    import random
    rng = random.Random(7)
    dom = ModDomain(5, 5)
    for _ in range(25):
        ta = {rng.randrange(-3, 40): rng.randrange(-500, 500)
              for _ in range(rng.randrange(1, 12))}
        tb = {rng.randrange(-3, 40): rng.randrange(-500, 500)
              for _ in range(rng.randrange(1, 12))}
        a, b = mk(ta, 50), mk(tb, 50)
        lhs = (a * b).to_mod(dom)
        rhs = a.to_mod(dom) * b.to_mod(dom)
        assert lhs == rhs
