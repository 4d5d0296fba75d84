"""Small helpers around mpmath interval arithmetic with outward float rounding."""
from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction

from mpmath import iv, mp

DEFAULT_BITS = 256


@contextmanager
def iv_precision(bits: int = DEFAULT_BITS):
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


def ivq(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def log_q(x: Fraction):
    return iv.log(iv.mpf(x.numerator)) - iv.log(iv.mpf(x.denominator))


def lo(x):
    return mp.make_mpf(x._mpi_[0])


def hi(x):
    return mp.make_mpf(x._mpi_[1])


def float_down(m) -> float:
    f = float(m)
    if mp.mpf(f) > m:
        f = math.nextafter(f, -math.inf)
    return f


def float_up(m) -> float:
    f = float(m)
    if mp.mpf(f) < m:
        f = math.nextafter(f, math.inf)
    return f


def certainly_le(a, b) -> bool:
    return hi(a) <= lo(b)
