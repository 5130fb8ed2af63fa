"""Exact arithmetic substrate: rationals and capped-precision p-adic numbers.

Rationals are plain ``fractions.Fraction`` (always reduced, exact).  The
p-adic side is a small immutable approximation type that tracks its own
significant precision pessimistically: results never claim more digits than
their inputs justify, and cancellation is accounted for explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple


def rational_from_parts(num: int, den: int) -> Fraction:
    """Reduced fraction num/den with the sign on the numerator."""
    if den == 0:
        raise ValueError("zero denominator")
    return Fraction(num, den)


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is +infinity")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_fraction(x, p: int):
    """p-adic valuation of a rational; None encodes +infinity (x == 0)."""
    x = Fraction(x)
    if x == 0:
        return None
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


class DiffValuation(NamedTuple):
    """Valuation of a difference; saturated means 'at least this' (hit the
    shared precision cap)."""

    value: int
    saturated: bool

    def __str__(self):
        return (">=%d" % self.value) if self.saturated else str(self.value)


@dataclass(frozen=True)
class PadicApprox:
    """A p-adic number p^valuation * unit with unit known mod p^precision.

    valuation is None for the exact-zero element (the +infinity flag), which
    absorbs addition and annihilates multiplication.  precision counts
    significant p-adic digits of the unit.  For a non-exact zero produced by
    full cancellation, valuation is None as well but precision records the
    absolute cap the cancellation was certified to.
    """

    prime: int
    valuation: int | None
    unit: int
    precision: int

    def __post_init__(self):
        if self.prime < 2:
            raise ValueError("prime must be >= 2")
        if self.precision < 1:
            raise ValueError("precision must be positive")
        if self.valuation is not None:
            if self.unit % self.prime == 0:
                raise ValueError("unit must be coprime to p")
            if not 0 < self.unit < self.prime ** self.precision:
                raise ValueError("unit out of range for stated precision")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, p: int, abs_prec: int) -> "PadicApprox":
        """The element known to vanish modulo p^abs_prec."""
        return cls(p, None, 0, abs_prec)

    @classmethod
    def from_rational(cls, x, p: int, M: int) -> "PadicApprox":
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, M)
        v = vp_fraction(x, p)
        num = x.numerator // p ** max(vp_int(x.numerator, p), 0)
        den = x.denominator // p ** max(vp_int(x.denominator, p), 0)
        pm = p ** M
        unit = num * pow(den, -1, pm) % pm
        return cls(p, v, unit, M)

    # -- queries -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.valuation is None

    @property
    def abs_precision(self) -> int:
        """Exponent a such that the value is known modulo p^a."""
        if self.valuation is None:
            return self.precision
        return self.valuation + self.precision

    def residue(self, digits: int | None = None) -> int:
        """The value p^valuation * unit reduced mod p^digits (digits must not
        exceed the absolute precision).  Requires valuation >= 0."""
        if digits is None:
            digits = self.abs_precision
        if digits > self.abs_precision:
            raise ValueError("requested digits exceed known precision")
        if self.valuation is None:
            return 0
        if self.valuation < 0:
            raise ValueError("negative valuation has no integer residue")
        return self.unit * self.prime ** self.valuation % self.prime ** digits

    # -- arithmetic --------------------------------------------------------

    def _require_same_prime(self, other: "PadicApprox"):
        if self.prime != other.prime:
            raise ValueError("mismatched primes")

    def __neg__(self):
        if self.is_zero:
            return self
        pm = self.prime ** self.precision
        return PadicApprox(self.prime, self.valuation, (-self.unit) % pm,
                           self.precision)

    def __add__(self, other: "PadicApprox") -> "PadicApprox":
        self._require_same_prime(other)
        p = self.prime
        cap = min(self.abs_precision, other.abs_precision)
        if self.is_zero and other.is_zero:
            return PadicApprox.zero(p, cap)
        if self.is_zero:
            return other._truncate_abs(cap)
        if other.is_zero:
            return self._truncate_abs(cap)
        v0 = min(self.valuation, other.valuation)
        pcap = p ** (cap - v0)
        s = (self.unit * p ** (self.valuation - v0)
             + other.unit * p ** (other.valuation - v0)) % pcap
        if s == 0:
            return PadicApprox.zero(p, cap)
        dv = vp_int(s, p)
        return PadicApprox(p, v0 + dv, s // p ** dv, cap - v0 - dv)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other: "PadicApprox") -> "PadicApprox":
        self._require_same_prime(other)
        p = self.prime
        if self.is_zero or other.is_zero:
            # absolute precision of a product with a capped zero
            if self.is_zero and other.is_zero:
                cap = self.precision + other.precision
            elif self.is_zero:
                cap = self.precision + (other.valuation or 0)
            else:
                cap = other.precision + (self.valuation or 0)
            return PadicApprox.zero(p, max(cap, 1))
        M = min(self.precision, other.precision)
        pm = p ** M
        return PadicApprox(p, self.valuation + other.valuation,
                           self.unit * other.unit % pm, M)

    def _truncate_abs(self, abs_prec: int) -> "PadicApprox":
        if self.is_zero:
            return PadicApprox.zero(self.prime, min(self.precision, abs_prec))
        M = abs_prec - self.valuation
        if M >= self.precision:
            return self
        if M < 1:
            return PadicApprox.zero(self.prime, abs_prec)
        return PadicApprox(self.prime, self.valuation,
                           self.unit % self.prime ** M, M)


def padic_valuation_of_difference(a: PadicApprox, b: PadicApprox) -> DiffValuation:
    """v_p(a - b), saturated at the shared absolute precision."""
    if a.prime != b.prime:
        raise ValueError("mismatched primes")
    d = a - b
    cap = min(a.abs_precision, b.abs_precision)
    if d.is_zero:
        return DiffValuation(cap, True)
    return DiffValuation(d.valuation, False)
