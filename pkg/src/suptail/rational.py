"""Small exact-arithmetic helpers shared by every module."""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Union

RationalLike = Union[Fraction, int, str, float]


def as_fraction(x: RationalLike) -> Fraction:
    """Convert to an exact Fraction.

    Floats go through their shortest decimal repr, so ``0.3`` becomes
    ``3/10`` rather than the nearest binary double.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def format_fraction(x: Fraction) -> str:
    """Always ``p/q``, including integers (``1/1``)."""
    return f"{x.numerator}/{x.denominator}"


def common_denominator(values: Iterable[Fraction]) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, v.denominator)
    return d


def log_fraction(x: Fraction) -> float:
    """Natural log of a positive rational that may be far below float range."""
    if x <= 0:
        raise ValueError("log of a nonpositive rational")
    return math.log(x.numerator) - math.log(x.denominator)


def log10_fraction(x: Fraction) -> float:
    return log_fraction(x) / math.log(10)


def round_up(x: float, ulps: int = 2) -> float:
    """Push a float a couple of ulps toward +inf; libm results are within 1 ulp."""
    for _ in range(ulps):
        x = math.nextafter(x, math.inf)
    return x


def round_down(x: float, ulps: int = 2) -> float:
    for _ in range(ulps):
        x = math.nextafter(x, -math.inf)
    return x


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling numbers of the second kind, S(n, k)."""
    if n < 0 or k < 0:
        raise ValueError("negative argument")
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def multinomial(counts: Iterable[int]) -> int:
    total = 0
    result = 1
    for c in counts:
        total += c
        result *= math.comb(total, c)
    return result
