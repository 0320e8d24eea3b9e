"""Exact rational enclosures for powers of two with fractional exponents.

2^(a/b) is irrational unless b divides a, so inequalities involving such
powers are decided against certified rational enclosures of controllable
width rather than floats.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import ModelError
from .model import ONE, as_fraction


def _nth_root_floor(x: int, n: int) -> int:
    """Largest r with r**n <= x, by Newton iteration on integers."""
    if x < 0 or n <= 0:
        raise ModelError("nth root needs x >= 0, n >= 1")
    if x in (0, 1) or n == 1:
        return x
    r = 1 << ((x.bit_length() + n - 1) // n)  # upper seed
    while True:
        nr = ((n - 1) * r + x // r ** (n - 1)) // n
        if nr >= r:
            break
        r = nr
    while r ** n > x:
        r -= 1
    while (r + 1) ** n <= x:
        r += 1
    return r


def pow2_interval(exponent, precision_bits: int = 48) -> tuple[Fraction, Fraction]:
    """An enclosure [lo, hi] of 2**exponent with hi - lo <= 2**-precision-ish.

    Exact (lo == hi) when the exponent is an integer.
    """
    e = as_fraction(exponent)
    if e.denominator == 1:
        v = (Fraction(2 ** e.numerator) if e.numerator >= 0
             else Fraction(1, 2 ** (-e.numerator)))
        return v, v
    if e < 0:
        lo, hi = pow2_interval(-e, precision_bits)
        return ONE / hi, ONE / lo
    a, b = e.numerator, e.denominator
    s = precision_bits
    # n/2^s <= 2^(a/b) < (n+1)/2^s  where  n = floor((2^(a+bs))^(1/b))
    n = _nth_root_floor(2 ** (a + b * s), b)
    return Fraction(n, 2 ** s), Fraction(n + 1, 2 ** s)
