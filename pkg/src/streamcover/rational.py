"""Exact dyadic helpers for positive rationals.

Every threshold in this package is a power of two applied to an exact
rational, so ceil/floor of lg(p/q) must be computed with integer bit
operations only -- floating-point log misclassifies near powers of two.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable

Weight = Fraction


def parse_ratio(text: str, *, require_positive: bool = False) -> Fraction:
    """Parse `<int>` or `<int>/<int>` into a reduced fraction.

    Decimal notation is rejected: file weights are exact rationals.
    """
    text = text.strip()
    try:
        if "/" in text:
            num_s, den_s = text.split("/", 1)
            value = Fraction(int(num_s), int(den_s))
        else:
            value = Fraction(int(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc
    if require_positive and value <= 0:
        raise ValueError(f"weight must be positive: {text!r}")
    return value


def parse_weight(text: str) -> Fraction:
    """Parse a strictly positive rational weight."""
    return parse_ratio(text, require_positive=True)


def format_ratio(value: Fraction) -> str:
    """Canonical text form: `p` when the denominator is 1, else `p/q`."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _le_pow2(p: int, q: int, k: int) -> bool:
    """p <= q * 2**k with both sides kept integral."""
    if k >= 0:
        return p <= q << k
    return p << -k <= q


def ceil_lg(num: int, den: int, tick: Callable[[int], None] | None = None) -> int:
    """ceil(lg(num/den)) for num, den > 0.

    Returns the unique k with den * 2**(k-1) < num <= den * 2**k.  The
    bit-length difference seeds k within one of the answer; the loops
    below run at most twice.  `tick` counts comparisons when profiling.
    """
    if num <= 0 or den <= 0:
        raise ValueError("ceil_lg needs positive integers")
    k = num.bit_length() - den.bit_length()
    while not _le_pow2(num, den, k):
        if tick is not None:
            tick(1)
        k += 1
    if tick is not None:
        tick(1)
    while _le_pow2(num, den, k - 1):
        if tick is not None:
            tick(1)
        k -= 1
    if tick is not None:
        tick(1)
    return k


def floor_lg(value: Fraction) -> int:
    """floor(lg(value)) for value > 0: the unique k with 2**k <= value < 2**(k+1)."""
    if value <= 0:
        raise ValueError("floor_lg needs a positive rational")
    num, den = value.numerator, value.denominator
    k = ceil_lg(num, den)
    # ceil == floor exactly on powers of two; otherwise floor = ceil - 1.
    if (k >= 0 and num == den << k) or (k < 0 and num << -k == den):
        return k
    return k - 1


def pow2_floor(value: Fraction) -> Fraction:
    """Largest (possibly negative) integral power of two not exceeding value."""
    k = floor_lg(value)
    if k >= 0:
        return Fraction(1 << k)
    return Fraction(1, 1 << -k)
