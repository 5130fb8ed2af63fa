"""Frobenius roots, the dense expansion engine, approximant reports, the
even-power vanishing check, and corrected-series assembly."""

import dataclasses
from fractions import Fraction

import pytest

from etadelta.exactnum import PadicApprox
from etadelta.cohomology import construct_representative
from etadelta.padiclimit import (FrobeniusRoots, assemble_corrected_series,
                                 beta_even_powers, check_inert,
                                 delta_approximants,
                                 even_power_vanishing_check,
                                 expand_representative_exact,
                                 expand_representative_mod)
from etadelta.etaforms import level9_catalog


def phi1():
    return construct_representative(1, 60)


def test_check_inert():
    assert check_inert(5)
    assert check_inert(11)
    assert check_inert(23)
    assert not check_inert(7)
    assert not check_inert(13)
    for p in (2, 3):
        with pytest.raises(ValueError):
            check_inert(p)


def test_frobenius_roots_and_beta():
    roots = FrobeniusRoots.for_g(5)
    assert roots.ag_p == 0
    assert roots.beta_squared == -125
    assert beta_even_powers(roots, 0) == 1
    assert beta_even_powers(roots, 2) == 15625
    split = FrobeniusRoots.for_g(7)
    assert split.ag_p == 20
    with pytest.raises(ValueError):
        beta_even_powers(split, 1)


def test_engine_matches_rational_series():
    phi = phi1()
    upto = 55
    n0, exact = expand_representative_exact(phi.provenance, upto)
    assert n0 == -1
    for n in range(n0, upto + 1):
        assert phi.representative.coefficient(n) == exact[n - n0]
    n0m, mod = expand_representative_mod(phi.provenance, upto, 5, 8)
    assert n0m == n0
    for n in range(n0, upto + 1):
        assert mod[n - n0] == exact[n - n0] % 5 ** 8


def test_engine_rejects_p_in_denominator():
    with pytest.raises(ValueError):
        expand_representative_mod(((0, Fraction(1, 5)), (1, Fraction(1))),
                                  20, 5, 6)


def test_delta_report_p5():
    rep = delta_approximants(phi1(), 5, m_max=3, M=6)
    assert rep.verdict
    assert rep.vp_delta == 0
    assert [d.value for d in rep.diff_valuations] == [3, 6, 9]
    assert all(not d.saturated for d in rep.diff_valuations)
    assert rep.stable_digits == 6
    assert rep.stabilized_residue is not None


def test_exact_and_mod_pipelines_agree():
    phi = phi1()
    mod = delta_approximants(phi, 5, m_max=2, M=6)
    exact = delta_approximants(phi, 5, m_max=2, M=6, pipeline="exact")
    assert exact.exact_values[0] == 49  # a_Phi(5) directly from the series
    assert mod.exact_values is None
    for a, b in zip(mod.approximants, exact.approximants):
        digits = min(a.abs_precision, b.abs_precision)
        assert a.residue(digits) == b.residue(digits)
    assert mod.verdict == exact.verdict
    assert mod.vp_delta == exact.vp_delta


def test_delta_rejects_split_prime_and_bad_mmax():
    with pytest.raises(ValueError):
        delta_approximants(phi1(), 7)
    with pytest.raises(ValueError):
        delta_approximants(phi1(), 5, m_max=0)
    with pytest.raises(ValueError):
        delta_approximants(phi1(), 5, pipeline="turbo")


def test_even_power_vanishing():
    entries = even_power_vanishing_check(phi1(), 5, 3)
    assert len(entries) == 3
    for e in entries:
        assert e is None or e >= 1


def test_even_power_corrupted_control():
    phi = phi1()
    # shift the g t^0 coefficient: reintroduces a cusp-form component whose
    # coefficient at p^(2m) is a unit times p^(3m), breaching the margin
    bad_prov = tuple((j, c + 1 if j == 0 else c) for j, c in phi.provenance)
    bad = dataclasses.replace(phi, provenance=bad_prov)
    with pytest.raises(ValueError):
        even_power_vanishing_check(bad, 5, 2)


def test_assemble_definition_with_zero_corrections():
    # below the first multiple of p every coefficient is prime to p, so the
    # uncorrected series is simply n^(1-k) a_Phi(n)
    phi = phi1()
    p, M = 23, 4
    zero = PadicApprox.zero(p, 12)
    series, ann = assemble_corrected_series(phi, zero, zero, p, M)
    for n in range(1, p):
        a = phi.representative.coefficient(n)
        expect = PadicApprox.from_rational(a * Fraction(1, n ** 3), p, M)
        got = series.coefficient(n)
        if expect.is_zero:
            assert got == 0
        else:
            assert got == expect.residue(M)
    assert min(ann.values()) >= M


def test_assemble_rejects_non_integral_correction():
    # alpha = delta = 0 leaves 49/125 at n = 5: not p-integral, refused
    phi = phi1()
    zero = PadicApprox.zero(5, 12)
    with pytest.raises(ValueError):
        assemble_corrected_series(phi, zero, zero, 40, 4)


def test_assemble_d3_roundtrip():
    phi = phi1()
    p, M = 5, 5
    rep = delta_approximants(phi, p, m_max=2, M=8)
    alpha, delta = rep.alpha_slot, rep.approximants[-1]
    series, _ = assemble_corrected_series(phi, alpha, delta, 80, M)
    d3 = series.apply_D(3)
    g = level9_catalog()["g"].expansion(80)
    n0, coeffs = expand_representative_mod(phi.provenance, 79, p, M)
    pm = p ** M
    for n, c in d3.items():
        expect = coeffs[n - n0]
        if n >= 1:
            av = alpha * PadicApprox.from_rational(Fraction(g.coefficient(n)),
                                                   p, M)
            if not av.is_zero:
                expect -= av.residue(M)
            if n % p == 0:
                dv = delta * PadicApprox.from_rational(
                    Fraction(g.coefficient(n // p)), p, M)
                if not dv.is_zero:
                    expect -= dv.residue(M)
        assert (c - expect) % pm == 0


def test_assemble_stabilization_floor_at_top_odd_power():
    # with delta taken to be exactly r_1, the corrected coefficient at
    # n = p^3 is a certified capped zero, visible as absence mod p^M
    phi = phi1()
    p = 5
    rep = delta_approximants(phi, p, m_max=1, M=8)
    alpha, delta = rep.alpha_slot, rep.approximants[-1]
    series, ann = assemble_corrected_series(phi, alpha, delta, 130, 4)
    assert series.coefficient(125) == 0
    assert ann[125] >= 4


def test_assemble_guard_exhaustion():
    phi = phi1()
    p = 5
    rep = delta_approximants(phi, p, m_max=1, M=8)
    alpha = rep.alpha_slot
    # a deliberately under-precise delta starves the guard at n = p
    weak = PadicApprox(p, 0, rep.approximants[-1].unit % p, 1)
    with pytest.raises(ValueError):
        assemble_corrected_series(phi, alpha, weak, 130, 6)
