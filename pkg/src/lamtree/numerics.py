"""Shared tolerances for every comparison of real numbers."""

import math
from fractions import Fraction

FEAS_TOL = 1e-7
INT_TOL = 1e-6


def is_integral(x, tol=INT_TOL) -> bool:
    return abs(x - round(x)) <= tol


def is_fractional(x, tol=INT_TOL) -> bool:
    return tol < x < 1 - tol


def snap(values, tol=INT_TOL):
    """Round entries that sit within tol of an integer."""
    out = []
    for x in values:
        r = round(x)
        out.append(float(r) if abs(x - r) <= tol else float(x))
    return out


def as_number(x):
    """Parse a cost given as int, float, Fraction or a "p/q" string."""
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite number {x}")
        return x
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot read {x!r} as a number")


def leq(a, b, tol=FEAS_TOL) -> bool:
    return a <= b + tol
