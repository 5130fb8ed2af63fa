"""Dedekind eta quotients on Gamma_0(N): expansions, Ligozat validity and
cusp orders, a small catalog of named level-9 forms, an exponent-vector
search, and exact linear algebra for bases of weakly holomorphic spaces with
poles only at infinity.

Conventions.  An eta quotient is prod_{d|N} eta(d tau)^{r_d}.  Cusp classes
of Gamma_0(N) are indexed by divisors c | N (the denominator), the class for
c occurring with multiplicity phi(gcd(c, N/c)).  The order formula used is
Ligozat's, normalized so that summing (multiplicity * order) over classes
gives weight * [SL_2(Z) : Gamma_0(N)] / 12 (the valence identity).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .qseries import RATIONAL, LaurentSeries


def divisors(N: int):
    return [d for d in range(1, N + 1) if N % d == 0]


def gamma0_index(N: int) -> int:
    idx = N
    for p in {f for f in range(2, N + 1) if N % f == 0 and _is_prime(f)}:
        idx = idx * (p + 1) // p
    return idx


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(n ** 0.5) + 1):
        if n % d == 0:
            return False
    return True


def cusp_classes(N: int):
    """(denominator c, multiplicity) for each cusp class of Gamma_0(N)."""
    out = []
    for c in divisors(N):
        mult = _euler_phi(math.gcd(c, N // c))
        out.append((c, mult))
    return out


def _euler_phi(n: int) -> int:
    return sum(1 for a in range(1, n + 1) if math.gcd(a, n) == 1)


def _is_square(n: int) -> bool:
    if n < 0:
        return False
    r = math.isqrt(n)
    return r * r == n


# -- raw Euler products ----------------------------------------------------

def pentagonal_terms(d: int, prec: int) -> dict:
    """prod_{n>=1} (1 - q^{dn}) via Euler's pentagonal number theorem."""
    c = {}
    k = 0
    while True:
        placed = False
        for e in (d * (k * (3 * k - 1) // 2), d * (k * (3 * k + 1) // 2)):
            if e < prec:
                c[e] = (-1) ** k
                placed = True
        if not placed and k > 0:
            break
        k += 1
    return c


def jacobi_cube_terms(d: int, prec: int) -> dict:
    """prod_{n>=1} (1 - q^{dn})^3 via Jacobi's identity."""
    c = {}
    k = 0
    while True:
        e = d * (k * (k + 1) // 2)
        if e >= prec:
            break
        c[e] = (-1) ** k * (2 * k + 1)
        k += 1
    return c


def _invert_unit_series(terms: dict, prec: int) -> dict:
    """Inverse of a series with constant term 1, as a dict, to order prec."""
    assert terms.get(0) == 1
    pos = sorted((n, v) for n, v in terms.items() if n > 0)
    inv = {0: Fraction(1)}
    for n in range(1, prec):
        s = Fraction(0)
        for m, v in pos:
            if m > n:
                break
            if n - m in inv:
                s -= v * inv[n - m]
        if s:
            inv[n] = s
    return inv


def euler_product_expansion(d: int, exponent: int, prec: int) -> LaurentSeries:
    """Expansion of prod_{n>=1}(1 - q^{dn})^exponent to order prec.

    The q^(d*exponent/24) prefactor of the eta power is not included; it is
    tracked by EtaQuotient.order_at_infinity."""
    if prec < 1:
        raise ValueError("prec must be >= 1")
    if exponent == 0:
        return LaurentSeries(RATIONAL, {0: 1}, prec)
    base = pentagonal_terms(d, prec)
    if exponent < 0:
        base = _invert_unit_series(base, prec)
    series = LaurentSeries(RATIONAL, base, prec)
    result = None
    power = series
    e = abs(exponent)
    while e:
        if e & 1:
            result = power if result is None else (result * power).truncate(prec)
        e >>= 1
        if e:
            power = (power * power).truncate(prec)
    return result


# -- eta quotients ---------------------------------------------------------

@dataclass(frozen=True)
class EtaQuotient:
    """prod_{d|N} eta(d tau)^{r_d} on Gamma_0(level)."""

    level: int
    exponents: tuple  # ((d, r_d), ...) over divisors with r_d != 0

    @classmethod
    def from_dict(cls, level: int, r: dict) -> "EtaQuotient":
        for d in r:
            if level % d != 0:
                raise ValueError("%d does not divide the level %d" % (d, level))
        return cls(level, tuple(sorted((d, rd) for d, rd in r.items() if rd)))

    @property
    def r(self) -> dict:
        return dict(self.exponents)

    @property
    def weight(self) -> Fraction:
        return Fraction(sum(rd for _, rd in self.exponents), 2)

    @property
    def order_at_infinity(self) -> Fraction:
        return Fraction(sum(d * rd for d, rd in self.exponents), 24)

    def ligozat_valid(self) -> bool:
        """Modularity on Gamma_0(level) with at most quadratic character."""
        N = self.level
        s1 = sum(d * rd for d, rd in self.exponents)
        s2 = sum((N // d) * rd for d, rd in self.exponents)
        return s1 % 24 == 0 and s2 % 24 == 0 and self.weight.denominator == 1

    def has_trivial_character(self) -> bool:
        if not self.ligozat_valid():
            return False
        w = int(self.weight)
        x = Fraction(1)
        for d, rd in self.exponents:
            x *= Fraction(d) ** rd
        x *= -1 if w % 2 else 1
        return x > 0 and _is_square(x.numerator) and _is_square(x.denominator)

    def __mul__(self, other: "EtaQuotient") -> "EtaQuotient":
        if self.level != other.level:
            raise ValueError("level mismatch")
        r = self.r
        for d, rd in other.exponents:
            r[d] = r.get(d, 0) + rd
        return EtaQuotient.from_dict(self.level, r)

    def __pow__(self, e: int) -> "EtaQuotient":
        return EtaQuotient.from_dict(self.level,
                                     {d: rd * e for d, rd in self.exponents})


def cusp_order(e: EtaQuotient, c: int) -> Fraction:
    """Ligozat's order of vanishing of the quotient at the cusp class with
    denominator c | N (negative means a pole)."""
    N = e.level
    if N % c != 0:
        raise ValueError("cusp denominator must divide the level")
    total = Fraction(0)
    for d, rd in e.exponents:
        total += Fraction(math.gcd(c, d) ** 2 * rd,
                          math.gcd(c, N // c) * c * d)
    return Fraction(N, 24) * total


def valence_degree(e: EtaQuotient) -> Fraction:
    """Sum of multiplicity * cusp order over all cusp classes."""
    return sum(Fraction(mult) * cusp_order(e, c)
               for c, mult in cusp_classes(e.level))


def eta_expansion(e: EtaQuotient, prec: int) -> LaurentSeries:
    """Full q-expansion including the leading exponent (1/24) sum d*r_d."""
    n0 = e.order_at_infinity
    if n0.denominator != 1:
        raise ValueError("non-integer leading exponent: invalid quotient")
    n0 = int(n0)
    rel = prec - n0  # order needed for the Euler-product part
    if rel < 1:
        raise ValueError("prec %d does not reach the leading exponent %d"
                         % (prec, n0))
    result = LaurentSeries(RATIONAL, {0: 1}, rel)
    for d, rd in e.exponents:
        result = (result * euler_product_expansion(d, rd, rel)).truncate(rel)
    return result.shift(n0)


def search_eta_quotients(N: int, weight, constraints: dict, box: int):
    """All exponent vectors with |r_d| <= box, the given weight, Ligozat
    validity, trivial character, and cusp_order(c) >= constraints[c] for
    each constrained cusp class."""
    divs = divisors(N)
    found = []

    def rec(i, partial):
        if i == len(divs):
            if sum(partial.values()) != 2 * weight:
                return
            e = EtaQuotient.from_dict(N, partial)
            if not e.has_trivial_character():
                return
            if e.order_at_infinity.denominator != 1:
                return
            for c, low in constraints.items():
                if cusp_order(e, c) < low:
                    return
            found.append(e)
            return
        for rd in range(-box, box + 1):
            partial[divs[i]] = rd
            rec(i + 1, partial)
        del partial[divs[i]]

    if box >= 0:
        rec(0, {})
    return found


# -- catalog ---------------------------------------------------------------

@dataclass(frozen=True)
class CatalogForm:
    """A named generator: either an eta quotient or an explicit expansion
    with declared cusp-order lower bounds."""

    name: str
    weight: int
    eta: EtaQuotient | None = None
    _orders: tuple = ()  # ((c, lower bound), ...) when eta is None
    _series: tuple = ()  # frozen (n, coeff-as-fraction) terms when eta is None

    def cusp_order_lower(self, c: int) -> Fraction:
        if self.eta is not None:
            return cusp_order(self.eta, c)
        return dict(self._orders)[c]

    def expansion(self, prec: int) -> LaurentSeries:
        if self.eta is not None:
            return eta_expansion(self.eta, prec)
        return _eisenstein_expansion(self.name, prec)


def _sigma1(n: int) -> int:
    return sum(d for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def _eisenstein_expansion(name: str, prec: int) -> LaurentSeries:
    """E_2(tau) - d E_2(d tau) for catalog names 'e2_<d>'."""
    d = int(name.split("_")[1])
    terms = {0: Fraction(1 - d)}
    for n in range(1, prec):
        t = -24 * _sigma1(n)
        if n % d == 0:
            t += 24 * d * _sigma1(n // d)
        if t:
            terms[n] = Fraction(t)
    return LaurentSeries(RATIONAL, terms, prec)


def level9_catalog() -> dict:
    """Named forms for the level-9 computation.

    g: the CM newform eta(3 tau)^8 in weight 4.
    t: the hauptmodul (eta(tau)/eta(9 tau))^3, single simple pole at oo.
    u: the weight -2 quotient eta(3 tau)^2 / eta(9 tau)^6, pole order 2 at
       oo, holomorphic at the other cusps.
    e2_3, e2_9: holomorphic weight-2 Eisenstein combinations (spanning
       material only)."""
    N = 9
    g = EtaQuotient.from_dict(N, {3: 8})
    t = EtaQuotient.from_dict(N, {1: 3, 9: -3})
    u = EtaQuotient.from_dict(N, {3: 2, 9: -6})
    cat = {
        "g": CatalogForm("g", 4, g),
        "t": CatalogForm("t", 0, t),
        "u": CatalogForm("u", -2, u),
    }
    for d in (3, 9):
        orders = tuple((c, Fraction(0)) for c, _ in cusp_classes(N))
        cat["e2_%d" % d] = CatalogForm("e2_%d" % d, 2, None, orders)
    return cat


def parse_catalog_file(text: str) -> dict:
    """Catalog file format: lines 'name N d1:r1 d2:r2 ...'."""
    cat = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        name, N = parts[0], int(parts[1])
        r = {}
        for item in parts[2:]:
            d, rd = item.split(":")
            r[int(d)] = int(rd)
        eta = EtaQuotient.from_dict(N, r)
        if eta.weight.denominator != 1:
            raise ValueError("half-integral weight quotient %r" % name)
        cat[name] = CatalogForm(name, int(eta.weight), eta)
    return cat


# -- exact linear algebra --------------------------------------------------

def rref(rows):
    """Exact reduced row-echelon form over Q.

    Returns (rank, reduced rows, transform) with transform * input == reduced
    (transform is the square record of the row operations)."""
    rows = [[Fraction(x) for x in row] for row in rows]
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    trans = [[Fraction(1 if i == j else 0) for j in range(nrows)]
             for i in range(nrows)]
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        trans[rank], trans[pivot] = trans[pivot], trans[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        trans[rank] = [x * inv for x in trans[rank]]
        for r in range(nrows):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
                trans[r] = [x - f * y for x, y in zip(trans[r], trans[rank])]
        rank += 1
        if rank == nrows:
            break
    return rank, rows, trans


@dataclass(frozen=True)
class FormSpaceBasis:
    """RREF basis (by leading exponent) of a space of weakly holomorphic
    forms with poles only at infinity."""

    level: int
    weight: int
    pole_bound: int
    basis: tuple          # LaurentSeries, leading coefficients 1
    provenance: tuple     # per basis vector: ((generator-word, coeff), ...)
    expected_dimension: int


def _monomial_words(catalog, weight, pole_bound, vanish_at_other_cusps):
    """Generator words (name -> power) of the target weight whose cusp-order
    certificate allows pole <= pole_bound at oo and meets the bound at the
    other cusps."""
    names = sorted(catalog)
    words = []

    def ok(word):
        N = None
        total_w = 0
        for name, e in word.items():
            total_w += catalog[name].weight * e
            N = N or (catalog[name].eta.level if catalog[name].eta else 9)
        if total_w != weight:
            return False
        low = Fraction(1) if vanish_at_other_cusps else Fraction(0)
        for c, _ in cusp_classes(N):
            order = sum(catalog[n].cusp_order_lower(c) * e
                        for n, e in word.items())
            if c == N:
                if order < -pole_bound:
                    return False
            elif order < low:
                return False
        return True

    max_pow = {n: (pole_bound + 2 if catalog[n].weight == 0 else 3)
               for n in names}

    def rec(i, word):
        if i == len(names):
            if word and ok(word):
                words.append(dict(word))
            return
        name = names[i]
        for e in range(0, max_pow[name] + 1):
            if e:
                word[name] = e
            rec(i + 1, word)
            word.pop(name, None)

    rec(0, {})
    return words


def build_basis(N: int, weight: int, pole_bound: int, catalog: dict,
                prec: int, vanish_at_other_cusps: bool = True) -> FormSpaceBasis:
    """RREF basis of the span of catalog products of the given weight with
    pole order <= pole_bound at oo (holomorphic, or vanishing when
    vanish_at_other_cusps, at every other cusp).

    Spanning words are expanded lazily, simplest first, and elimination
    stops once the rank reaches the genus-0 Riemann-Roch dimension (which
    bounds the space from above, so early stopping is sound)."""
    margin = 4 * pole_bound + 40  # Sturm-type margin for rank decisions
    if prec < pole_bound + margin:
        raise ValueError("prec %d too small; need >= %d"
                         % (prec, pole_bound + margin))
    words = _monomial_words(catalog, weight, pole_bound, vanish_at_other_cusps)
    if not words:
        raise ValueError("no spanning products for weight %d, pole %d"
                         % (weight, pole_bound))
    n_other = sum(mult for c, mult in cusp_classes(N) if c != N)
    expected = weight + pole_bound - (n_other if vanish_at_other_cusps else 0) + 1
    words.sort(key=lambda w: (sum(e for n, e in w.items() if n != "t"),
                              w.get("t", 0)))
    base_cache = {}

    ext = prec + pole_bound + 2  # headroom for precision lost to poles

    def expand(word):
        key = tuple(sorted((n, e) for n, e in word.items() if n != "t"))
        if key not in base_cache:
            s = LaurentSeries(RATIONAL, {0: 1}, ext)
            for name, e in key:
                f = catalog[name].expansion(ext)
                for _ in range(e):
                    s = s * f
            base_cache[key] = [s]  # successive t-multiples appended lazily
        chain = base_cache[key]
        j = word.get("t", 0)
        while len(chain) <= j:
            chain.append(chain[-1] * catalog["t"].expansion(ext))
        return chain[j].truncate(prec)

    pivots = {}  # leading exponent -> (series, provenance dict word-key -> coeff)
    for word in words:
        if len(pivots) >= max(expected, 0):
            break
        s = expand(word)
        prov = {tuple(sorted(word.items())): Fraction(1)}
        while not s.is_zero and s.n0 in pivots:
            piv, piv_prov = pivots[s.n0]
            f = s.coefficient(s.n0)
            s = s + piv.scalar_mul(-f)
            for wk, cv in piv_prov.items():
                prov[wk] = prov.get(wk, Fraction(0)) - f * cv
        if s.is_zero:
            continue
        lead = s.coefficient(s.n0)
        s = s.scalar_mul(1 / lead)
        prov = {wk: cv / lead for wk, cv in prov.items() if cv}
        pivots[s.n0] = (s, prov)
    # back-eliminate to a fully reduced echelon basis
    order = sorted(pivots)
    for i, n in enumerate(order):
        s, prov = pivots[n]
        for m in order[i + 1:]:
            f = s.coefficient(m)
            if f:
                piv, piv_prov = pivots[m]
                s = s + piv.scalar_mul(-f)
                for wk, cv in piv_prov.items():
                    prov[wk] = prov.get(wk, Fraction(0)) - f * cv
        pivots[n] = (s, {wk: cv for wk, cv in prov.items() if cv})
    basis = tuple(pivots[n][0] for n in order)
    prov = tuple(tuple(sorted(pivots[n][1].items())) for n in order)
    return FormSpaceBasis(N, weight, pole_bound, basis, prov, expected)
