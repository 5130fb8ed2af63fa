"""Truncation-aware Laurent q-series over exact coefficient domains.

Two domains are supported: exact rationals (sparse exponent -> Fraction map)
and integers mod p^M (dense contiguous array, the layout used for long
expansions).  Precision is an exclusive truncation bound and is propagated
pessimistically through every operation; a claimed coefficient is always
exact.

The modular operators live here too: D = q d/dq, the Eichler integral,
U_p, V_p and the weight-k Hecke operator T_l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .fastmul import mul_mod, _school_mul

RATIONAL = "rational"


@dataclass(frozen=True)
class ModDomain:
    """Coefficients in Z / p^M Z."""

    p: int
    M: int

    @property
    def modulus(self) -> int:
        return self.p ** self.M

    def __str__(self):
        return "mod:%d^%d" % (self.p, self.M)


def _domains_match(a, b):
    if a.domain != b.domain:
        raise ValueError("coefficient domain mismatch: %s vs %s"
                         % (a.domain, b.domain))


class LaurentSeries:
    """A truncated Laurent series sum_{n0 <= n < prec} a(n) q^n.

    Immutable; all arithmetic returns new series.  The series with no terms
    and truncation bound P is the zero series known to order P.
    """

    __slots__ = ("domain", "prec", "_n0", "_data")

    def __init__(self, domain, terms, prec):
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "prec", prec)
        if domain == RATIONAL:
            data = {}
            for n, c in (terms.items() if isinstance(terms, dict) else terms):
                if n >= prec:
                    raise ValueError("term at %d beyond prec %d" % (n, prec))
                c = Fraction(c)
                if c:
                    data[n] = c
            object.__setattr__(self, "_data", data)
            object.__setattr__(self, "_n0", min(data) if data else prec)
        elif isinstance(domain, ModDomain):
            mod = domain.modulus
            if isinstance(terms, tuple):
                n0, coeffs = terms  # dense (offset, list) form
                coeffs = [c % mod for c in coeffs[:max(prec - n0, 0)]]
            else:
                items = terms.items() if isinstance(terms, dict) else list(terms)
                items = [(n, c % mod) for n, c in items if c % mod]
                if items:
                    for n, _ in items:
                        if n >= prec:
                            raise ValueError("term at %d beyond prec %d" % (n, prec))
                    n0 = min(n for n, _ in items)
                    coeffs = [0] * (max(n for n, _ in items) - n0 + 1)
                    for n, c in items:
                        coeffs[n - n0] = c
                else:
                    n0, coeffs = prec, []
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()
            lead = 0
            while lead < len(coeffs) and coeffs[lead] == 0:
                lead += 1
            if lead:
                coeffs = coeffs[lead:]
                n0 += lead
            object.__setattr__(self, "_data", coeffs)
            object.__setattr__(self, "_n0", n0 if coeffs else prec)
        else:
            raise ValueError("unknown domain %r" % (domain,))

    def __setattr__(self, *a):
        raise AttributeError("LaurentSeries is immutable")

    # -- basic structure ---------------------------------------------------

    @classmethod
    def zero(cls, domain, prec):
        return cls(domain, {}, prec)

    @property
    def n0(self) -> int:
        """Leading exponent (== prec for the zero series)."""
        return self._n0

    @property
    def is_zero(self) -> bool:
        return not self._data

    def coefficient(self, n):
        if n >= self.prec:
            raise ValueError("coefficient %d not known (prec %d)" % (n, self.prec))
        if self.domain == RATIONAL:
            return self._data.get(n, Fraction(0))
        if self._n0 <= n < self._n0 + len(self._data):
            return self._data[n - self._n0]
        return 0

    def items(self):
        """Sorted (exponent, nonzero coefficient) pairs."""
        if self.domain == RATIONAL:
            return sorted(self._data.items())
        return [(self._n0 + i, c) for i, c in enumerate(self._data) if c]

    def leading_term(self):
        if self.is_zero:
            raise ValueError("zero series has no leading term")
        return self._n0, self.coefficient(self._n0)

    def truncate(self, prec):
        if prec >= self.prec:
            return self
        return LaurentSeries(self.domain, [(n, c) for n, c in self.items() if n < prec],
                             prec)

    def shift(self, e):
        """Multiply by q^e."""
        return LaurentSeries(self.domain, [(n + e, c) for n, c in self.items()],
                             self.prec + e)

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (self.domain == other.domain and self.prec == other.prec
                and self.items() == other.items())

    def __hash__(self):
        return hash((str(self.domain), self.prec, tuple(self.items())))

    def __repr__(self):
        terms = self.items()
        head = " + ".join("%s*q^%d" % (c, n) for n, c in terms[:6])
        if len(terms) > 6:
            head += " + ..."
        return "<LaurentSeries %s prec=%d: %s>" % (self.domain, self.prec,
                                                   head or "0")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "LaurentSeries") -> "LaurentSeries":
        _domains_match(self, other)
        prec = min(self.prec, other.prec)
        terms = {}
        for n, c in self.items():
            if n < prec:
                terms[n] = c
        for n, c in other.items():
            if n < prec:
                terms[n] = terms.get(n, 0) + c
        return LaurentSeries(self.domain, terms, prec)

    def __neg__(self):
        return self.scalar_mul(-1)

    def __sub__(self, other):
        return self + (-other)

    def scalar_mul(self, c) -> "LaurentSeries":
        return LaurentSeries(self.domain, [(n, x * c) for n, x in self.items()],
                             self.prec)

    def __mul__(self, other: "LaurentSeries") -> "LaurentSeries":
        _domains_match(self, other)
        prec = min(self.prec + other.n0, other.prec + self.n0)
        if self.is_zero or other.is_zero:
            return LaurentSeries.zero(self.domain, prec)
        if self.domain == RATIONAL:
            terms = {}
            for n, a in self._data.items():
                for m, b in other._data.items():
                    if n + m < prec:
                        terms[n + m] = terms.get(n + m, 0) + a * b
            return LaurentSeries(self.domain, terms, prec)
        out_len = prec - self._n0 - other._n0
        if out_len <= 0:
            return LaurentSeries.zero(self.domain, prec)
        mod = self.domain.modulus
        if len(self._data) * len(other._data) < 4096:
            coeffs = _school_mul(self._data, other._data, out_len)
            coeffs = [c % mod for c in coeffs]
        else:
            coeffs = mul_mod(self._data, other._data, out_len, mod)
        return LaurentSeries(self.domain, (self._n0 + other._n0, coeffs), prec)

    # -- modular operators -------------------------------------------------

    def apply_D(self, times: int = 1) -> "LaurentSeries":
        """(q d/dq)^times: coefficient at n is multiplied by n^times."""
        if times < 1:
            raise ValueError("times must be positive")
        return LaurentSeries(self.domain,
                             [(n, c * n ** times) for n, c in self.items()],
                             self.prec)

    def eichler_integral(self, k: int) -> "LaurentSeries":
        """E_h: coefficient at n becomes n^(1-k) a(n); input must be
        supported on n >= 1."""
        if any(n <= 0 for n, _ in self.items()):
            raise ValueError("Eichler integral requires support on n >= 1")
        if self.domain == RATIONAL:
            terms = [(n, c * Fraction(1, n ** (k - 1))) for n, c in self.items()]
        else:
            mod = self.domain.modulus
            terms = []
            for n, c in self.items():
                d = n ** (k - 1)
                if math.gcd(d, mod) != 1:
                    raise ValueError("n^(k-1) not invertible mod %s at n=%d"
                                     % (self.domain, n))
                terms.append((n, c * pow(d, -1, mod)))
        return LaurentSeries(self.domain, terms, self.prec)

    def apply_Up(self, p: int) -> "LaurentSeries":
        """Coefficient at n becomes a(pn)."""
        prec = -((-self.prec) // p)  # ceil
        return LaurentSeries(self.domain,
                             [(n // p, c) for n, c in self.items() if n % p == 0],
                             prec)

    def apply_Vp(self, p: int) -> "LaurentSeries":
        """Exponent dilation q -> q^p."""
        prec = p * (self.prec - 1) + 1
        return LaurentSeries(self.domain, [(p * n, c) for n, c in self.items()],
                             prec)

    def principal_part(self) -> "LaurentSeries":
        """Terms with n <= 0 only."""
        return LaurentSeries(self.domain,
                             [(n, c) for n, c in self.items() if n <= 0],
                             self.prec)

    def to_mod(self, domain: ModDomain) -> "LaurentSeries":
        """Reduce a rational series with p-integral coefficients mod p^M."""
        if self.domain != RATIONAL:
            raise ValueError("to_mod expects a rational-domain series")
        mod = domain.modulus
        terms = []
        for n, c in self.items():
            if math.gcd(c.denominator, domain.p) != 1:
                raise ValueError("denominator not coprime to p at exponent %d" % n)
            terms.append((n, c.numerator * pow(c.denominator, -1, mod) % mod))
        return LaurentSeries(domain, terms, self.prec)


@dataclass(frozen=True)
class OperatorContext:
    """Weight, level and character data for Hecke operators."""

    weight: int
    level: int
    chi: dict = field(default_factory=dict)  # d mod N -> exact value

    def chi_value(self, d: int):
        if math.gcd(d, self.level) > 1:
            return 0
        if not self.chi:
            return 1  # trivial character
        return self.chi[d % self.level]


def hecke_Tl(a: LaurentSeries, l: int, ctx: OperatorContext) -> LaurentSeries:
    """Weight-k Hecke operator on q-expansions:
    (T_l a)(n) = a(ln) + chi(l) l^(k-1) a(n/l), second term only when l | n.
    For l | N this degenerates to U_l."""
    chi_l = ctx.chi_value(l)
    prec = -((-a.prec) // l)
    terms = {}
    for n, c in a.items():
        if n % l == 0 and n // l < prec:
            terms[n // l] = terms.get(n // l, 0) + c
        if chi_l and l * n < prec:
            terms[l * n] = terms.get(l * n, 0) + c * chi_l * l ** (ctx.weight - 1)
    return LaurentSeries(a.domain, terms, prec)


# -- serialization ---------------------------------------------------------

def serialize(series: LaurentSeries) -> str:
    """Line-oriented text format: header then one 'n c' line per term."""
    lines = ["domain=%s, n0=%d, prec=%d" % (series.domain, series.n0, series.prec)]
    for n, c in series.items():
        lines.append("%d %s" % (n, c))
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> LaurentSeries:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header = dict(kv.strip().split("=") for kv in lines[0].split(","))
    prec = int(header["prec"])
    dom = header["domain"]
    if dom == RATIONAL:
        domain = RATIONAL
        parse = Fraction
    else:
        p, M = dom.split(":")[1].split("^")
        domain = ModDomain(int(p), int(M))
        parse = int
    terms = []
    for ln in lines[1:]:
        n, c = ln.split()
        terms.append((int(n), parse(c)))
    return LaurentSeries(domain, terms, prec)
