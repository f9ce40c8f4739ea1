import math
from fractions import Fraction

from memnet.errors import InputShapeError

__doc__ = """Exact scalar helpers

All construction happens over Python's Fraction (arbitrary precision, always reduced).
The helpers here parse and print rationals, take exact ceilings and provide
rational bounds for the few irrational constants the constructions need.
"""

__all__ = [
    "ExactScalar",
    "PI_LOWER",
    "PI_UPPER",
    "to_exact",
    "parse_exact",
    "format_exact",
    "ceil_div",
    "nested_ceil",
    "ceil_sqrt",
    "upper_sqrt",
    "ceil_log2",
    "ceil_power",
    "round_half_up",
    "rationalize",
]

ExactScalar = Fraction

# 333/106 < pi < 355/113
PI_LOWER = Fraction(333, 106)
PI_UPPER = Fraction(355, 113)


def to_exact(value):
    """
    Convert int, Fraction, decimal string or "num/den" string to a Fraction.
    Floats are converted exactly (their binary value), never via repr.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_exact(value)
    return Fraction(value)


def parse_exact(text):
    """
    Parse a decimal ("-1.25", "3e-2") or ratio ("7/3") literal exactly
    """
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise InputShapeError(f"not an exact numeric literal: {text!r}")


def format_exact(value):
    value = to_exact(value)
    return f"{value.numerator}/{value.denominator}"


def ceil_div(x, a):
    """Exact ceil(x / a)."""
    return math.ceil(to_exact(x) / to_exact(a))


def nested_ceil(x, a, b):
    """
    ceil(ceil(x / a) / b); equals ceil(x / (a*b)) for a > 0 and integer b > 0.
    Sequential compression rounds rely on this identity.
    """
    return math.ceil(Fraction(ceil_div(x, a), b))


def ceil_sqrt(q):
    """Smallest integer k >= 0 with k*k >= q, for rational q >= 0."""
    q = to_exact(q)
    if q < 0:
        raise ValueError(f"square root of negative value {q}")
    n = math.ceil(q)
    k = math.isqrt(n)
    return k if k * k >= n else k + 1


def upper_sqrt(q, denominator=10**6):
    """
    Rational upper bound of sqrt(q) on the grid 1/denominator
    """
    q = to_exact(q)
    return Fraction(ceil_sqrt(q * denominator * denominator), denominator)


def ceil_log2(n):
    """ceil(log2(n)) for integer n >= 1."""
    if n < 1:
        raise ValueError(f"log2 of {n}")
    return (n - 1).bit_length()


def ceil_power(n, exponent):
    """
    ceil(n ** exponent) for integer n >= 1 and rational exponent, robust to float noise.
    """
    exponent = to_exact(exponent)
    guess = math.ceil(n ** float(exponent) - 1e-9)
    p, q = exponent.numerator, exponent.denominator
    if q > 1000 or abs(p) > 10000:
        return guess
    # ceil(n^(p/q)) is the smallest k with k^q >= n^p
    target = n**p if p >= 0 else Fraction(1, n ** (-p))
    k = max(guess - 1, 0)
    while k**q < target:
        k += 1
    while k > 0 and (k - 1) ** q >= target:
        k -= 1
    return k


def round_half_up(x):
    return math.floor(x + 0.5)


def rationalize(x, bits=64):
    """Round a float to the dyadic grid 2^-bits and return it exactly."""
    return Fraction(round(x * (1 << bits)), 1 << bits)
