"""Executable pieces of the halving induction: the N_k / rho_k / C_k schedule,
paired sign sums and their Hoeffding bounds, exhaustive bad-half counting,
the counting-factor identity, and the log-domain constant chain.

rho_k is irrational in general, so it is carried as an mpmath interval and
reported as a (low, high) pair of floats rounded outward.  Chain steps hold
only when the upper end of the left side is below the lower end of the
right side.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import iv

from . import _config, _kernels
from ._interval import (
    certainly_le as _certainly_le,
    float_down as _float_down,
    float_up as _float_up,
    hi as _hi,
    iv_precision as _iv_precision,
    ivq as _ivq,
    lo as _lo,
    log_q as _log_q,
)
from .rational import RationalLike, as_fraction, round_up
from .space import FunctionTable

_INT64_SAFE = 1 << 62


# ---------------------------------------------------------------------------
# schedule
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Level:
    k: int
    N_k: int
    rho_low: float
    rho_high: float
    C_k: Fraction
    rho_at_least_half: bool
    C_k_below_exp: bool


@dataclass(frozen=True)
class HalvingSchedule:
    rho: Fraction
    N0: int
    levels: tuple[Level, ...]
    window_lower_ok: bool
    window_upper_ok: bool

    @property
    def in_window(self) -> bool:
        return self.window_lower_ok and self.window_upper_ok


def _rho_intervals(rho: Fraction, N0: int, k_max: int) -> list:
    """Interval enclosures of rho_0 .. rho_k_max (call inside _iv_precision)."""
    out = [_ivq(rho)]
    current = out[0]
    eighth = iv.mpf(1) / 8
    for j in range(k_max):
        n_j = iv.mpf(N0 * 2**j)
        current = current / (1 + 3 / n_j**eighth)
        out.append(current)
    return out


def C_k(rho: RationalLike, k: int) -> Fraction:
    rho = as_fraction(rho)
    out = Fraction(1)
    for j in range(k + 1):
        out *= 1 + rho / 2**j
    return out


def build_schedule(rho: RationalLike, N0: int, k_max: int) -> HalvingSchedule:
    rho = as_fraction(rho)
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if N0 < 1 or k_max < 0:
        raise ValueError("need N0 >= 1 and k_max >= 0")
    levels = []
    with _iv_precision():
        rhos = _rho_intervals(rho, N0, k_max)
        half = _ivq(rho / 2)
        two_rho = _ivq(2 * rho)
        for k, r in enumerate(rhos):
            ck = C_k(rho, k)
            levels.append(
                Level(
                    k=k,
                    N_k=N0 * 2**k,
                    rho_low=_float_down(_lo(r)),
                    rho_high=_float_up(_hi(r)),
                    C_k=ck,
                    rho_at_least_half=_certainly_le(half, r),
                    C_k_below_exp=_hi(iv.log(_ivq(ck))) < _lo(two_rho),
                )
            )
    return HalvingSchedule(
        rho,
        N0,
        tuple(levels),
        window_lower_ok=256 * N0**2 * rho**3 > 1,
        window_upper_ok=64 * N0**2 * rho**3 <= 1,
    )


def default_N0(rho: RationalLike) -> int:
    """Largest power of two with N0 <= rho^(-3/2)/8; it always lands in the window."""
    rho = as_fraction(rho)
    e = 0
    while 64 * (2 ** (e + 1)) ** 2 * rho**3 <= 1:
        e += 1
    return 2**e


# ---------------------------------------------------------------------------
# paired sign sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairingState:
    pairs: tuple[tuple[int, int], ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.pairs) != len(self.signs):
            raise ValueError("one sign per pair")
        flat = [i for pair in self.pairs for i in pair]
        if sorted(flat) != list(range(2 * len(self.pairs))):
            raise ValueError("pairs must form a perfect matching of 0..2N-1")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")

    @property
    def half_size(self) -> int:
        return len(self.pairs)

    @property
    def selected_half(self) -> frozenset[int]:
        return frozenset(a if s == 1 else b for (a, b), s in zip(self.pairs, self.signs))

    @classmethod
    def identity(cls, point_count: int, signs: Sequence[int] | None = None) -> "PairingState":
        if point_count % 2:
            raise ValueError("need an even number of points")
        half = point_count // 2
        pairs = tuple((2 * l, 2 * l + 1) for l in range(half))
        return cls(pairs, tuple(signs) if signs is not None else (1,) * half)

    @classmethod
    def random(
        cls, point_count: int, seed: int, signs: Sequence[int] | None = None
    ) -> "PairingState":
        if point_count % 2:
            raise ValueError("need an even number of points")
        rng = np.random.default_rng(seed)
        perm = [int(v) for v in rng.permutation(point_count)]
        half = point_count // 2
        pairs = tuple((perm[2 * l], perm[2 * l + 1]) for l in range(half))
        if signs is None:
            signs = tuple(int(s) for s in rng.choice((-1, 1), size=half))
        return cls(pairs, tuple(signs))


def pair_differences(row: Sequence[RationalLike], pairing: PairingState) -> list[Fraction]:
    if len(row) != 2 * pairing.half_size:
        raise ValueError("row length does not match the pairing")
    vals = [as_fraction(v) for v in row]
    return [vals[a] - vals[b] for a, b in pairing.pairs]


def randomized_sum(row: Sequence[RationalLike], pairing: PairingState) -> Fraction:
    diffs = pair_differences(row, pairing)
    return sum((s * d for s, d in zip(pairing.signs, diffs)), Fraction(0))


@dataclass(frozen=True)
class HoeffdingBounds:
    bound_a: float
    bound_b: float | None
    degenerate: bool
    bound_b_valid: bool | None


def _exp_neg_up(x: Fraction) -> float:
    """exp(-x) for x >= 0, rounded up."""
    ex = math.nextafter(float(-x), math.inf)
    return min(1.0, round_up(math.exp(ex)))


def hoeffding_bounds(
    diffs: Sequence[RationalLike],
    z: RationalLike,
    N_k: int | None = None,
    rho_next: RationalLike | None = None,
) -> HoeffdingBounds:
    """Tail bounds for P(U > 2z) with U = sum of independent signs times diffs.

    ``bound_a`` uses the actual diffs; ``bound_b`` replaces their squared sum
    by 4 N_k rho_next, which is legitimate whenever that is an upper bound.
    """
    z = as_fraction(z)
    if z <= 0:
        raise ValueError("z must be positive")
    sq = sum((as_fraction(d) ** 2 for d in diffs), Fraction(0))
    if sq == 0:
        bound_a, degenerate = 1.0, True
    else:
        bound_a, degenerate = _exp_neg_up(2 * z * z / sq), False
    bound_b = valid = None
    if N_k is not None and rho_next is not None:
        rn = as_fraction(rho_next)
        bound_b = _exp_neg_up(z * z / (2 * N_k * rn))
        valid = sq <= 4 * N_k * rn
    return HoeffdingBounds(bound_a, bound_b, degenerate, valid)


def exact_Uk_tail(row: Sequence[RationalLike], pairing: PairingState, z: RationalLike) -> Fraction:
    """P(U_k > 2z) over all 2^N_k sign vectors (the pairing's own signs are ignored)."""
    cap = _config.sign_enum_cap()
    if pairing.half_size > cap:
        raise ValueError(f"sign enumeration supports at most {cap} pairs")
    z = as_fraction(z)
    diffs = pair_differences(row, pairing)
    den = math.lcm(z.denominator, *(d.denominator for d in diffs))
    ints = [int(d * den) for d in diffs]
    dist = {0: 1}
    for d in ints:
        nxt: dict[int, int] = {}
        for s, c in dist.items():
            nxt[s + d] = nxt.get(s + d, 0) + c
            nxt[s - d] = nxt.get(s - d, 0) + c
        dist = nxt
    thr = 2 * z * den
    favourable = sum(c for s, c in dist.items() if s > thr)
    return Fraction(favourable, 2 ** len(ints))


# ---------------------------------------------------------------------------
# exhaustive half counting
# ---------------------------------------------------------------------------

def count_bad_halves(table: FunctionTable, threshold: RationalLike) -> int:
    """Number of N_k-subsets Y of the 2N_k points with max_f sum_{x in Y} f(x) >= threshold."""
    m = table.point_count
    if m % 2:
        raise ValueError("need an even number of points")
    cap = _config.halves_points_cap()
    if m > cap:
        raise ValueError(f"subset enumeration supports at most {cap} points, got {m}")
    t = as_fraction(threshold)
    half = m // 2
    values = table.scaled(extra_factor=t.denominator, headroom=half)
    thr = t.numerator * table.value_denominator
    if values.dtype == object or abs(thr) >= _INT64_SAFE:
        raise ValueError("denominators too large for int64 enumeration")
    return int(_kernels.count_subsets_ge(values, half, np.int64(thr)))


@dataclass(frozen=True)
class StatementBCheck:
    count: int
    total: int
    bound: float
    holds: bool
    hypothesis_holds: bool


def statement_b_check(row: Sequence[RationalLike], rho_next: RationalLike, z: RationalLike):
    """Count N_k-subsets V with sum_V f >= N_k rho_next + z against exp(-z^2/(2 N_k rho_next)) C(2N_k, N_k)."""
    rn, z = as_fraction(rho_next), as_fraction(z)
    if rn <= 0 or z <= 0:
        raise ValueError("need rho_next > 0 and z > 0")
    table = FunctionTable.from_rows([row])
    n_half = table.point_count // 2
    count = count_bad_halves(table, n_half * rn + z)
    total = math.comb(2 * n_half, n_half)
    bound = round_up(_exp_neg_up(z * z / (2 * n_half * rn)) * total)
    hyp = sum(table.values[0], Fraction(0)) <= 2 * n_half * rn
    return StatementBCheck(count, total, bound, Fraction(count) <= Fraction(bound), hyp)


# ---------------------------------------------------------------------------
# counting factor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CountingFactor:
    direct: Fraction  # N_k^p C(2N_k, N_k) / C(2N_k - p, N_k - p)
    product_form: Fraction  # N_{k+1}^p prod_{i<p} (1 + i / (2 (N_k - i)))

    @property
    def identity_holds(self) -> bool:
        return self.direct == self.product_form


def counting_factor(N_k: int, p: int) -> CountingFactor:
    if N_k < 1:
        raise ValueError("N_k must be positive")
    if not 0 <= p <= N_k:
        raise ValueError(f"need 0 <= p <= N_k, got p={p}")
    direct = Fraction(N_k**p * math.comb(2 * N_k, N_k), math.comb(2 * N_k - p, N_k - p))
    prod = Fraction((2 * N_k) ** p)
    for i in range(1, p):
        prod *= 1 + Fraction(i, 2 * (N_k - i))
    return CountingFactor(direct, prod)


# ---------------------------------------------------------------------------
# constant chain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainStep:
    k: int
    N_k: int
    rho_k_low: float
    rho_k_high: float
    C_k: Fraction
    step: str
    lhs_log: float
    rhs_log: float
    holds: bool


def chain_report(
    rho: RationalLike, N0: int, k: int, p: int, D: RationalLike = 1, L: RationalLike = 1
) -> list[ChainStep]:
    """Evaluate every inequality that carries the induction from level k to k+1.

    All quantities are natural logs carried as intervals.  This is a report:
    the explicit constants are expected to fail outside very small rho.
    """
    rho, D, L = as_fraction(rho), as_fraction(D), as_fraction(L)
    if not 0 < rho < 1 or N0 < 1 or k < 0 or p < 0 or D < 1:
        raise ValueError("parameters out of range")
    N_k = N0 * 2**k
    ck, ck1 = C_k(rho, k), C_k(rho, k + 1)
    steps: list[ChainStep] = []
    # quantities of size 1/N0 and rho are compared against O(log N_k) terms
    bits = 128 + 2 * (N0.bit_length() + k) + 2 * max(rho.numerator.bit_length(),
                                                      rho.denominator.bit_length())
    with _iv_precision(bits):
        rhos = _rho_intervals(rho, N0, k + 1)
        r_k, r_next = rhos[k], rhos[k + 1]
        lo, hi = _float_down(_lo(r_k)), _float_up(_hi(r_k))

        def add(name, lhs, rhs):
            steps.append(
                ChainStep(k, N_k, lo, hi, ck, name, float(lhs.mid), float(rhs.mid),
                          _certainly_le(lhs, rhs))
            )

        if p > N_k:
            raise ValueError("need p <= N_k")
        cf = Fraction(N_k) ** p
        for i in range(p):
            cf *= Fraction(2 * N_k - i, N_k - i)
        ident = cf == Fraction(2 * N_k) ** p * math.prod(
            (1 + Fraction(i, 2 * (N_k - i)) for i in range(1, p)), start=Fraction(1)
        )
        steps.append(ChainStep(k, N_k, lo, hi, ck, "counting-factor identity", 0.0, 0.0, ident))
        if p == 0:
            return steps

        log_rho = _log_q(rho)
        log_D = _log_q(D)
        L_iv = _ivq(L)
        two = iv.mpf(2)
        N0_iv = iv.mpf(N0)
        absorb = iv.mpf(1) / 100 * two ** (iv.mpf(k) / 20) * iv.exp(-log_rho / 20)

        add("rho_{k+1} >= rho/2", _log_q(rho / 2), iv.log(r_next))

        # the common factor C(2N_k, N_k) * D is cancelled from both sides
        lhs_27 = (
            L_iv * iv.log(two ** (iv.mpf(k) / 8) * N0_iv ** (iv.mpf(1) / 8) / r_next)
            - two ** (iv.mpf(3 * k) / 4) * N0_iv ** (iv.mpf(3) / 4) * r_next / 2
        )
        add("entropy term <= absorbed half-sample tail", lhs_27, -absorb)

        log_cf = _log_q(cf)
        quad = iv.mpf(p * p) / (two ** (k + 1) * N0_iv)
        p_log_next = iv.mpf(p) * iv.log(iv.mpf(2 * N_k))
        add("counting factor <= N_{k+1}^p exp(p^2/(2^{k+1}N0))", log_cf, p_log_next + quad)
        rho43 = two ** (-(k + 1)) * iv.exp(log_rho * 4 / 3)
        add("p^2/(2^{k+1}N0) <= 2^{-(k+1)} rho^{4/3}", quad, rho43)
        add("exp(2^{-(k+1)} rho^{4/3}) <= 1 + 2^{-(k+1)} rho/3", rho43,
            iv.log(1 + two ** (-(k + 1)) * _ivq(rho) / 3))

        log_ck = _log_q(ck)
        add(
            "exp(-2^{k/20} rho^{-1/20}/100) <= C_k rho^{p/4} 2^{-(k+1)} rho/3",
            -absorb,
            log_ck + iv.mpf(p) / 4 * log_rho + log_rho - iv.log(iv.mpf(3)) - (k + 1) * iv.log(two),
        )
        lhs_8 = log_cf + iv.log(
            iv.exp(log_ck + log_D + iv.mpf(p) / 4 * log_rho) + iv.exp(log_D - absorb)
        )
        rhs_8 = _log_q(ck1) + p_log_next + log_D + iv.mpf(p) / 4 * log_rho
        add("level-k bound implies level-(k+1) bound", lhs_8, rhs_8)
        add("C_{k+1} <= 2", _log_q(ck1), iv.log(two))
    return steps
