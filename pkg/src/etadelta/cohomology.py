"""The weight-k quotient space S_k^! / D^{k-1} M_{2-k}^! made concrete.

Everything here is exact rational q-series algebra on Gamma_0(9), weight
k = 4: certification that a combination of catalog products is a weakly
holomorphic cusp form with poles only at infinity, the residue pairing
<phi, psi> = sum_{n != 0} a_phi(n) a_psi(-n) / n^(k-1), canonical reduction
modulo D^(k-1)-images, construction of the normalized class representative
Phi with <Phi, g> = 1, and the Hecke eigen-class consistency check.

Standing normalization: every series handled here has poles only at the
infinite cusp, and at least one member of any pairing vanishes at the other
cusps, so the residue pairing collapses to the infinity term.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .qseries import RATIONAL, LaurentSeries, OperatorContext, hecke_Tl
from .etaforms import (FormSpaceBasis, cusp_classes, eta_expansion,
                       level9_catalog)

WEIGHT = 4
LEVEL = 9

# reference prime for pinning the cusp-form component of a representative:
# a_g(25) = -125 is nonzero, so the ratio below is well defined
_REF_PRIME = 5


@dataclass(frozen=True)
class Certificate:
    """Audit record that a series is weakly holomorphic with poles only at
    infinity; min_order_elsewhere >= 1 additionally certifies vanishing
    constant terms at every cusp other than infinity."""

    level: int
    weight: int
    pole_order: int
    min_order_elsewhere: Fraction
    constant_term: Fraction

    @property
    def vanishes_elsewhere(self) -> bool:
        return self.min_order_elsewhere >= 1

    def to_text(self) -> str:
        return ("certificate level=%d weight=%d pole_order=%d "
                "min_order_elsewhere=%s constant_term=%s"
                % (self.level, self.weight, self.pole_order,
                   self.min_order_elsewhere, self.constant_term))


@dataclass(frozen=True)
class PairingValue:
    """Exact value of the residue pairing plus the signed per-exponent
    contributions (n, a_phi(n) a_psi(-n) / n^(k-1)) that produced it."""

    value: Fraction
    cusp_support: tuple
    contributions: tuple


@dataclass(frozen=True)
class CuspFormClass:
    """A normalized representative Phi of the distinguished class in the
    quotient S_4^! / D^3 M_{-2}^!.

    provenance lists (j, c_j) with Phi = sum c_j * g * t^j exactly; the
    class is pinned only up to rational multiples of [g], which the p-adic
    extraction downstream provably tolerates."""

    level: int
    weight: int
    pole_order: int
    representative: LaurentSeries
    pairing_with_g: PairingValue
    provenance: tuple
    certificate: Certificate

    @property
    def rep_id(self) -> str:
        return "phi_pole%d" % self.pole_order

    def to_text(self) -> str:
        prov = " ".join("%d:%s" % (j, c) for j, c in self.provenance)
        return ("representative %s level=%d weight=%d\nprovenance %s\n"
                "pairing_with_g %s\n%s\n"
                % (self.rep_id, self.level, self.weight, prov,
                   self.pairing_with_g.value, self.certificate.to_text()))


def _word_cusp_order(word, catalog, c):
    return sum(catalog[name].cusp_order_lower(c) * e for name, e in word)


def _word_expansion(word, catalog, prec):
    # multiplying by a factor with a pole at infinity costs precision, so
    # work with enough headroom and truncate once at the end
    extra = 2
    for name, e in word:
        form = catalog[name]
        lead = int(form.eta.order_at_infinity) if form.eta is not None else 0
        extra += e * max(0, -lead)
    s = LaurentSeries(RATIONAL, {0: 1}, prec + extra)
    for name, e in word:
        f = catalog[name].expansion(prec + extra)
        for _ in range(e):
            s = s * f
    return s.truncate(prec)


def certify_weakly_holomorphic_cusp_form(combination, catalog, prec):
    """Certify that sum coeff * product(word) lies in S_k^! with poles only
    at infinity.

    combination: iterable of (word, coeff), word a tuple of (name, power).
    Returns (Certificate, LaurentSeries).  Rejected when any constituent has
    cusp order exactly 0 at a cusp != infinity (its constant term there is
    unknown, so vanishing cannot be certified), or when the constant term at
    infinity is nonzero."""
    combination = [(tuple(word), Fraction(c)) for word, c in combination]
    if not combination:
        raise ValueError("empty combination")
    weight = None
    min_order = None
    for word, _ in combination:
        w = sum(catalog[name].weight * e for name, e in word)
        if weight is None:
            weight = w
        elif w != weight:
            raise ValueError("mixed weights %d and %d in combination" % (weight, w))
        for c, _mult in cusp_classes(LEVEL):
            if c == LEVEL:
                continue
            order = _word_cusp_order(word, catalog, c)
            if order < 1:
                raise ValueError(
                    "constituent %r has cusp order %s at denominator %d; "
                    "cannot certify a vanishing constant term there" %
                    (word, order, c))
            min_order = order if min_order is None else min(min_order, order)
    series = LaurentSeries.zero(RATIONAL, prec)
    for word, coeff in combination:
        series = series + _word_expansion(word, catalog, prec).scalar_mul(coeff)
    const = series.coefficient(0)
    if const != 0:
        raise ValueError("constant term at infinity is %s, not 0" % const)
    pole = max(0, -series.n0) if not series.is_zero else 0
    cert = Certificate(LEVEL, weight, pole, min_order, const)
    return cert, series


def pairing(phi: LaurentSeries, psi: LaurentSeries, k: int,
            cert_phi: Certificate, cert_psi: Certificate) -> PairingValue:
    """<phi, psi> = sum_{n != 0} a_phi(n) a_psi(-n) / n^(k-1).

    Both certificates must place all poles at infinity, and at least one
    side must vanish at every other cusp so that no other cusp contributes.
    The precision of each series must cover the pole depth of the other."""
    if cert_phi is None or cert_psi is None:
        raise ValueError("pairing requires pole-location certificates")
    for cert in (cert_phi, cert_psi):
        if cert.min_order_elsewhere < 0:
            raise ValueError("certificate allows poles away from infinity")
    if not (cert_phi.vanishes_elsewhere or cert_psi.vanishes_elsewhere):
        raise ValueError("neither side vanishes at the cusps != infinity")
    need_phi = cert_psi.pole_order + 1
    need_psi = cert_phi.pole_order + 1
    if phi.prec < need_phi or psi.prec < need_psi:
        raise ValueError("insufficient precision: need phi to %d, psi to %d"
                         % (need_phi, need_psi))
    contributions = []
    total = Fraction(0)
    for n, a in phi.items():
        if n == 0 or -n >= psi.prec:
            continue
        b = psi.coefficient(-n)
        if b:
            term = a * b / Fraction(n ** (k - 1))
            contributions.append((n, term))
            total += term
    return PairingValue(total, ("oo",), tuple(sorted(contributions)))


# -- representative construction -------------------------------------------

def _gt_powers(jmax: int, prec: int, catalog):
    """Expansions of g * t^j for j = 0..jmax, all at the same precision."""
    ext = prec + jmax + 2
    g = catalog["g"].expansion(ext)
    t = catalog["t"].expansion(ext)
    out = [g.truncate(prec)]
    cur = g
    for _ in range(jmax):
        cur = cur * t
        out.append(cur.truncate(prec))
    return out


def _principal_solve(j: int, gt: list, prec: int):
    """Combination X_j = sum_{i<=j+1} d_i (g t^i) with a(-j) = 1 and
    a(n) = 0 for -j < n <= 0; returns (series, coefficient dict)."""
    coeffs = {}
    series = LaurentSeries.zero(RATIONAL, prec)
    for n in range(-j, 1):
        want = Fraction(1) if n == -j else Fraction(0)
        have = series.coefficient(n)
        i = 1 - n  # g t^i leads at exponent -i + 1 = n
        lead = gt[i].coefficient(n)
        assert lead == 1
        d = want - have
        if d:
            coeffs[i] = coeffs.get(i, Fraction(0)) + d
            series = series + gt[i].scalar_mul(d)
    return series, coeffs


def construct_representative(pole_order: int, prec: int,
                             catalog=None) -> CuspFormClass:
    """The normalized class representative with pole order exactly m.

    Phi is an exact combination of g * t^j with zero constant term,
    <Phi, g> = 1, and the cusp-form component pinned by requiring
    a_Phi(25) = 0 (the g * t^0 coefficient is otherwise free; this choice
    makes the even-power coefficients a_Phi(p^{2m}) vanish to high order,
    which the p-adic layer checks).  Needs prec > 25 for that pin."""
    m = pole_order
    if m < 1:
        raise ValueError("pole order must be >= 1: a holomorphic cusp form "
                         "cannot pair to 1 with g since <g, g> = 0 and "
                         "S_4(Gamma_0(9)) is one-dimensional")
    if prec < 30:
        raise ValueError("prec must be >= 30 (the normalization pin reads "
                         "the coefficient at q^25)")
    catalog = catalog or level9_catalog()
    gt = _gt_powers(m + 1, prec, catalog)
    g = gt[0]

    x_m, coeff_m = _principal_solve(m, gt, prec)
    g_cert = Certificate(LEVEL, WEIGHT, 0, Fraction(1), Fraction(0))
    x_cert = Certificate(LEVEL, WEIGHT, m, Fraction(1), Fraction(0))
    pv_m = pairing(x_m, g, WEIGHT, x_cert, g_cert)
    if m == 1:
        if pv_m.value == 0:
            raise ValueError("obstruction at pole order 1: <X_1, g> = 0; "
                             "try pole order 2")
        lam = 1 / pv_m.value
        raw = x_m.scalar_mul(lam)
        coeffs = {i: d * lam for i, d in coeff_m.items()}
    else:
        x_1, coeff_1 = _principal_solve(1, gt, prec)
        pv_1 = pairing(x_1, g, WEIGHT,
                       Certificate(LEVEL, WEIGHT, 1, Fraction(1),
                                   Fraction(0)), g_cert)
        if pv_1.value == 0:
            raise ValueError("obstruction: <X_1, g> = 0")
        mu = (1 - pv_m.value) / pv_1.value
        raw = x_m + x_1.scalar_mul(mu)
        coeffs = dict(coeff_m)
        for i, d in coeff_1.items():
            coeffs[i] = coeffs.get(i, Fraction(0)) + d * mu

    # pin the free g-component: force the coefficient at the reference
    # even prime power 5^2 to zero
    ag25 = g.coefficient(_REF_PRIME ** 2)
    assert ag25 == -125
    c = raw.coefficient(_REF_PRIME ** 2) / ag25
    phi = raw + g.scalar_mul(-c)
    if c:
        coeffs[0] = coeffs.get(0, Fraction(0)) - c

    provenance = tuple(sorted((j, cv) for j, cv in coeffs.items() if cv))
    combo = [((("g", 1), ("t", j)) if j else (("g", 1),), cv)
             for j, cv in provenance]
    cert, series = certify_weakly_holomorphic_cusp_form(combo, catalog, prec)
    assert series == phi
    pv = pairing(phi, g, WEIGHT, cert, g_cert)
    if pv.value != 1:
        raise ValueError("normalization failed: <Phi, g> = %s" % pv.value)
    if -phi.n0 != m:
        raise ValueError("no representative of pole order exactly %d; the "
                         "leading term cancelled, try pole order %d"
                         % (m, m + 1))
    return CuspFormClass(LEVEL, WEIGHT, m, phi, pv, provenance, cert)


# -- canonical reduction and Hecke consistency -----------------------------

def reduce_canonical(f: LaurentSeries, basis_2mk: FormSpaceBasis):
    """Subtract D^(k-1)-images of the weight-(2-k) basis to clear every
    exponent <= -2; the output (exponents >= -1) is the canonical
    representative of [f].  Returns (reduced, witness) where witness lists
    (basis index, coefficient) of the removed image combination."""
    k = 2 - basis_2mk.weight
    by_lead = {}
    for i, b in enumerate(basis_2mk.basis):
        by_lead[b.n0] = i
    reduced = f
    witness = []
    while not reduced.is_zero and reduced.n0 <= -2:
        n, a = reduced.leading_term()
        if n not in by_lead:
            raise ValueError("basis depth insufficient: no weight-%d element "
                             "with leading exponent %d (need pole bound >= %d)"
                             % (basis_2mk.weight, n, -n))
        b = basis_2mk.basis[by_lead[n]]
        img = b.apply_D(k - 1)
        coeff = a / img.coefficient(n)
        reduced = reduced + img.scalar_mul(-coeff)
        witness.append((by_lead[n], coeff))
    return reduced, tuple(witness)


def hecke_class_check(phi: CuspFormClass, l: int, ctx: OperatorContext,
                      basis_2mk: FormSpaceBasis, margin: int = 20):
    """Check T_l [Phi] = a_g(l) [Phi] in the quotient, i.e. that the
    canonical reduction of T_l Phi - a_g(l) Phi is a multiple of g.

    Returns (ok, witness) with the exact g-multiple and the reduction
    provenance; the zero claim is verified through exponent margin + pole
    depth, far beyond the valence bound of the space involved."""
    rep = phi.representative
    g = eta_expansion(level9_catalog()["g"].eta, rep.prec)
    ag_l = g.coefficient(l) if l < g.prec else None
    if ag_l is None:
        raise ValueError("g expansion too short for a_g(%d)" % l)
    tl = hecke_Tl(rep, l, ctx)
    diff = tl + rep.scalar_mul(-ag_l)
    max_pole = max(phi.pole_order * l, phi.pole_order)
    if basis_2mk.pole_bound < max_pole + 2:
        raise ValueError("weight-(2-k) basis pole bound %d insufficient; "
                         "need >= %d" % (basis_2mk.pole_bound, max_pole + 2))
    reduced, witness = reduce_canonical(diff, basis_2mk)
    check_to = margin + max_pole
    if reduced.prec < check_to:
        raise ValueError("precision %d too low to certify membership "
                         "(need %d)" % (reduced.prec, check_to))
    if reduced.is_zero:
        return True, {"g_multiple": Fraction(0), "reduction": witness}
    lam = reduced.coefficient(1)
    rem = reduced + g.truncate(reduced.prec).scalar_mul(-lam)
    ok = all(rem.coefficient(n) == 0
             for n in range(rem.n0, min(rem.prec, check_to)))
    return ok, {"g_multiple": lam, "reduction": witness,
                "residual_leading": None if ok else rem.leading_term()}
