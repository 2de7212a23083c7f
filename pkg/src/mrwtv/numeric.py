"""Scalar helpers shared by the exact (Fraction) and floating-point code paths."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Union

Number = Union[Fraction, float, int]

# relative tolerance used whenever a float path has to decide "is this zero"
FLOAT_TOL = 1e-12


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, Rational)) and not isinstance(x, bool)


def to_fraction(x) -> Fraction:
    """Convert to Fraction; floats go through their shortest repr so 0.4 -> 2/5."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(repr(float(x)))


def coerce(x, exact: bool) -> Number:
    return to_fraction(x) if exact else float(x)


def coerce_vector(values: Iterable, exact: bool) -> list:
    return [coerce(v, exact) for v in values]


def sign(x) -> int:
    return (x > 0) - (x < 0)


def to_json_number(x, exact: bool = False):
    """Fractions become {num, den} in exact mode; everything else a float."""
    if exact and isinstance(x, (Fraction, int)):
        x = Fraction(x)
        return {"num": x.numerator, "den": x.denominator}
    if x == float("inf"):
        return "inf"
    if x == float("-inf"):
        return "-inf"
    return float(x)


def from_json_number(obj) -> Number:
    if isinstance(obj, dict):
        return Fraction(obj["num"], obj["den"])
    if obj == "inf":
        return float("inf")
    if obj == "-inf":
        return float("-inf")
    return obj


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(x)
