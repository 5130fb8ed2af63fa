"""Dense polynomial multiplication via Kronecker substitution.

Coefficient lists are packed into single big integers (gmpy2.pack), multiplied
once by GMP, and unpacked.  This is exact for any coefficient size as long as
the per-slot bit width covers the largest possible convolution sum, which we
compute from the actual operands.  It is the workhorse behind the mod-p^M
series arithmetic used for multi-million-term expansions.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpz

# below this many output terms plain schoolbook wins (no packing overhead)
_SCHOOLBOOK_CUTOFF = 64


def _school_mul(a, b, out_len):
    c = [0] * out_len
    for i, x in enumerate(a):
        if x == 0 or i >= out_len:
            continue
        for j, y in enumerate(b):
            if i + j >= out_len:
                break
            if y:
                c[i + j] += x * y
    return c


def _pack(vals, slot):
    return gmpy2.pack([mpz(v) for v in vals], slot)


def _unpack(z, slot, out_len):
    vals = gmpy2.unpack(z, slot)
    if len(vals) < out_len:
        vals = list(vals) + [mpz(0)] * (out_len - len(vals))
    return vals[:out_len]


def mul_nonneg(a: list, b: list, out_len: int) -> list:
    """Product of two polynomials with nonnegative coefficients, truncated."""
    if not a or not b:
        return [0] * out_len
    if min(len(a), len(b)) * min(len(a), len(b), out_len) < _SCHOOLBOOK_CUTOFF ** 2:
        return _school_mul(a, b, out_len)
    slot = (max(a).bit_length() + max(b).bit_length()
            + min(len(a), len(b)).bit_length() + 1)
    z = _pack(a, slot) * _pack(b, slot)
    return [int(v) for v in _unpack(z, slot, out_len)]


def mul_mod(a: list, b: list, out_len: int, modulus: int) -> list:
    """Truncated product of residue lists, reduced mod modulus."""
    c = mul_nonneg([x % modulus for x in a], [x % modulus for x in b], out_len)
    return [x % modulus for x in c]


def mul_int(a: list, b: list, out_len: int) -> list:
    """Truncated product over Z with signed coefficients.

    Kronecker packing needs nonnegative slots, so each operand is split into
    positive and negative parts (four packed products, combined by sign)."""
    if not a or not b:
        return [0] * out_len
    if min(len(a), len(b)) * min(len(a), len(b), out_len) < _SCHOOLBOOK_CUTOFF ** 2:
        return _school_mul(a, b, out_len)
    ap = [v if v > 0 else 0 for v in a]
    an = [-v if v < 0 else 0 for v in a]
    bp = [v if v > 0 else 0 for v in b]
    bn = [-v if v < 0 else 0 for v in b]
    slot = (max(max(ap), max(an)).bit_length()
            + max(max(bp), max(bn)).bit_length()
            + min(len(a), len(b)).bit_length() + 1)
    zp = _pack(ap, slot) * _pack(bp, slot) + _pack(an, slot) * _pack(bn, slot)
    zn = _pack(ap, slot) * _pack(bn, slot) + _pack(an, slot) * _pack(bp, slot)
    cp = _unpack(zp, slot, out_len)
    cn = _unpack(zn, slot, out_len)
    return [int(x - y) for x, y in zip(cp, cn)]


def series_inverse_mod(b: list, out_len: int, modulus: int) -> list:
    """Inverse of a power series mod modulus by Newton iteration.

    b[0] must be invertible mod modulus."""
    inv0 = pow(b[0] % modulus, -1, modulus)
    r = [inv0]
    prec = 1
    while prec < out_len:
        prec = min(2 * prec, out_len)
        t = mul_mod(b[:prec], r, prec, modulus)
        t = [(-x) % modulus for x in t]
        t[0] = (t[0] + 2) % modulus
        r = mul_mod(r, t, prec, modulus)
    return r + [0] * (out_len - len(r))


def series_inverse_int(b: list, out_len: int) -> list:
    """Inverse of an integer power series with b[0] in {1, -1}."""
    if b[0] not in (1, -1):
        raise ValueError("leading coefficient must be a unit in Z")
    r = [b[0]]
    prec = 1
    while prec < out_len:
        prec = min(2 * prec, out_len)
        t = mul_int(b[:prec], r, prec)
        t = [-x for x in t]
        t[0] += 2
        r = mul_int(r, t, prec)
    return r + [0] * (out_len - len(r))
