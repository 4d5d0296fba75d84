"""Exact tail probabilities for suprema of partial sums, and the closed-form
bounds they are compared against.

Left-hand sides are exact rationals.  Bound values are evaluated in interval
arithmetic and rounded up to the next float, so a reported violation is
genuine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from mpmath import iv

from . import _config, _kernels
from .rational import (
    RationalLike,
    as_fraction,
    common_denominator,
    log10_fraction,
    log_fraction,
    stirling2,
)
from ._interval import float_up, hi, iv_precision, ivq, log_q
from .space import (
    FiniteSpace,
    FunctionTable,
    make_uniform_space,
    subset_indicator_class,
    value_atoms,
)

_LN10 = math.log(10)
_INT64_SAFE = 1 << 62

# constants as stated with each bound
THEOREM1_EXPONENT = Fraction(1, 50)
THEOREM1A_FACTOR = 2
THEOREM1A_EXPONENT = Fraction(1, 4)
LEMMA21_EXPONENT = Fraction(1, 4)
LEMMA31_FACTOR = 2
LEMMA31_EXPONENT = Fraction(1, 25)
INTRO_EXAMPLE_C = 4


@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float | Fraction
    satisfied: bool
    margin_log10: float
    in_regime: bool | None = None


@dataclass
class TailResult:
    probability: Fraction | float
    method: str  # exact-dp | inclusion-exclusion | closed-form | enumeration | monte-carlo
    ci: tuple[float, float] | None = None
    compared_bounds: list[BoundCheck] = field(default_factory=list)
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Hypothesis:
    name: str
    holds: bool
    informational: bool = False


def compare_bound(
    name: str,
    lhs: Fraction,
    rhs: float | Fraction,
    in_regime: bool | None = None,
    rhs_log10: float | None = None,
) -> BoundCheck:
    """Exact comparison of a rational left side against a bound value."""
    satisfied = lhs <= Fraction(rhs)
    if rhs_log10 is None:
        if isinstance(rhs, Fraction):
            rhs_log10 = log10_fraction(rhs) if rhs > 0 else -math.inf
        else:
            rhs_log10 = math.log10(rhs) if rhs > 0 else -math.inf
    lhs_log10 = log10_fraction(lhs) if lhs > 0 else -math.inf
    if lhs_log10 == -math.inf:
        margin = math.inf
    else:
        margin = rhs_log10 - lhs_log10
    return BoundCheck(name, rhs, satisfied, margin, in_regime)


# ---------------------------------------------------------------------------
# exact supremum tail by atom occupancy
# ---------------------------------------------------------------------------

def exact_sup_tail(
    table: FunctionTable,
    space: FiniteSpace,
    n: int,
    u: RationalLike,
    strict: bool = False,
    cap: int | None = None,
) -> TailResult:
    """P(sup_f S_n(f) >= u) (or ``> u`` when ``strict``) for i.i.d. draws from ``space``.

    Draws only matter through how many land in each constancy cell of the
    class, so the sum runs over occupancy vectors with multinomial weights.
    Subtrees that are already hit (values are nonnegative, so partial sums
    only grow) are summed in closed form, and subtrees that cannot reach the
    threshold are skipped.
    """
    table.check_space(space)
    if n < 1:
        raise ValueError("n must be at least 1")
    u = as_fraction(u)
    part = value_atoms(table, space)
    keep = [i for i, m in enumerate(part.atom_measures) if m > 0]
    q = len(keep)
    cap = _config.dp_state_cap() if cap is None else cap
    states = math.comb(n + q - 1, q - 1)
    if states > cap:
        raise ValueError(
            f"occupancy DP needs {states} states (Q={q} atoms, n={n}), above the cap of {cap};"
            " use mc_sup_tail for a Monte Carlo estimate"
        )
    measures = [part.atom_measures[i] for i in keep]
    wden = common_denominator(measures)
    wint = [int(m * wden) for m in measures]
    columns = [part.signatures[i] for i in keep]
    vden = common_denominator(v for col in columns for v in col)
    lhs_factor = u.denominator
    rhs = u.numerator * vden

    dtype = np.int64 if n * vden * lhs_factor < _INT64_SAFE and abs(rhs) < _INT64_SAFE else object
    coef = np.array(
        [[int(v * vden) * lhs_factor for v in col] for col in columns], dtype=dtype
    )  # Q x R
    suffmax = np.empty_like(coef)
    suffmax[-1] = coef[-1]
    for a in range(q - 2, -1, -1):
        suffmax[a] = np.maximum(coef[a], suffmax[a + 1])
    suffw = [0] * (q + 1)
    for a in range(q - 1, -1, -1):
        suffw[a] = suffw[a + 1] + wint[a]

    def hit(value) -> bool:
        return value > rhs if strict else value >= rhs

    acc = 0
    visited = 0
    stack = [(0, n, np.zeros(coef.shape[1], dtype=dtype), 1, 1)]
    while stack:
        a, r, partial, mult, w = stack.pop()
        visited += 1
        if hit(partial.max()):
            acc += mult * w * suffw[a] ** r
            continue
        if r == 0 or not hit((partial + r * suffmax[a]).max()):
            continue
        if a == q - 1:
            # remaining draws all land in the last atom
            if hit((partial + r * coef[a]).max()):
                acc += mult * w * wint[a] ** r
            continue
        binom = 1
        for c in range(r + 1):
            stack.append((a + 1, r - c, partial + c * coef[a], mult * binom, w * wint[a] ** c))
            binom = binom * (r - c) // (c + 1)
    prob = Fraction(acc, wden**n)
    return TailResult(
        prob,
        "exact-dp",
        details={"atoms": q, "states_bound": states, "nodes_visited": visited, "strict": strict},
    )


def enumerate_sup_tail(
    table: FunctionTable, space: FiniteSpace, n: int, u: RationalLike, strict: bool = False
) -> Fraction:
    """Brute-force oracle: sum over all N**n sequences.

    Runs in int64 inside the kernels, so it refuses instances where
    (weight denominator)**n or the scaled sums would overflow.
    """
    table.check_space(space)
    u = as_fraction(u)
    wden = space.weight_denominator
    if wden**n >= _INT64_SAFE:
        raise ValueError("weight denominator too large for int64 enumeration")
    values = table.scaled(extra_factor=u.denominator, headroom=n)
    if values.dtype == object:
        raise ValueError("value denominators too large for int64 enumeration")
    thr = u.numerator * table.value_denominator
    if abs(thr) >= _INT64_SAFE:
        raise ValueError("threshold too large for int64 enumeration")
    weights = np.array(space.integer_weights, dtype=np.int64)
    acc = _kernels.enum_hit_weight(values, weights, n, np.int64(thr), strict)
    return Fraction(int(acc), wden**n)


# ---------------------------------------------------------------------------
# product-hit sets by inclusion-exclusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ImplicitFamily:
    """A family of R sets in a space too large to enumerate.

    The space is described only through its atoms: each atom carries the
    bitmask of family members containing it and its exact measure.  The
    mass not listed belongs to points outside every set.
    """

    class_size: int
    atoms: tuple[tuple[int, Fraction], ...]

    def __post_init__(self):
        total = sum((m for _, m in self.atoms), Fraction(0))
        if total > 1:
            raise ValueError("atom measures exceed 1")
        for mask, m in self.atoms:
            if m < 0:
                raise ValueError("negative atom measure")
            if mask < 0 or mask >> self.class_size:
                raise ValueError(f"signature {mask:b} references rows beyond class_size")

    def set_measure(self, f: int) -> Fraction:
        return sum((m for mask, m in self.atoms if mask >> f & 1), Fraction(0))

    def intersection_measure(self, members: Sequence[int]) -> Fraction:
        need = 0
        for f in members:
            need |= 1 << f
        return sum((m for mask, m in self.atoms if mask & need == need), Fraction(0))

    def compressed_table(self) -> tuple[FunctionTable, FiniteSpace]:
        """The family restricted to one representative point per atom.

        L1 distances under any measure on the original space only depend on
        the pushed-forward atom masses, so covering numbers computed on the
        compressed table are those of the original family.
        """
        masks = [mask for mask, m in self.atoms if m > 0]
        weights = [m for _, m in self.atoms if m > 0]
        rest = 1 - sum(weights, Fraction(0))
        if rest > 0:
            masks.append(0)
            weights.append(rest)
        rows = [
            [Fraction(mask >> f & 1) for mask in masks] for f in range(self.class_size)
        ]
        return FunctionTable.from_rows(rows), FiniteSpace(tuple(weights))

    @classmethod
    def from_table(cls, table: FunctionTable, space: FiniteSpace) -> "ImplicitFamily":
        if not table.is_indicator:
            raise ValueError("rows must be 0/1-valued")
        table.check_space(space)
        acc: dict[int, Fraction] = {}
        for x in range(table.point_count):
            mask = 0
            for f, row in enumerate(table.values):
                if row[x] == 1:
                    mask |= 1 << f
            acc[mask] = acc.get(mask, Fraction(0)) + space.weights[x]
        return cls(table.class_size, tuple((k, v) for k, v in acc.items() if k and v))


def _inclusion_exclusion(
    class_size: int, measure_of: Callable[[int], Fraction], p: int
) -> Fraction:
    """sum over nonempty T of (-1)^(|T|+1) measure(T)^p, pruning empty intersections.

    ``measure_of`` receives the member bitmask of T; once an intersection has
    measure zero every superset does too.
    """
    total = Fraction(0)
    cache: dict[int, Fraction] = {}
    stack = [(f, 1 << f, 1) for f in range(class_size)]
    while stack:
        last, members, size = stack.pop()
        m = cache.get(members)
        if m is None:
            m = cache[members] = measure_of(members)
        if m == 0:
            continue
        total += m**p if size % 2 else -(m**p)
        for g in range(last + 1, class_size):
            stack.append((g, members | 1 << g, size + 1))
    return total


def bp_measure(
    p: int,
    table: FunctionTable | None = None,
    space: FiniteSpace | None = None,
    family: ImplicitFamily | None = None,
    intersection_measure: Callable[[frozenset], Fraction] | None = None,
    class_size: int | None = None,
    cap: int | None = None,
) -> TailResult:
    """Measure of the union over f of {all p coordinates land where f = 1}.

    Give either an explicit indicator ``table`` with its ``space``, an
    :class:`ImplicitFamily`, or an ``intersection_measure`` callable together
    with ``class_size``.
    """
    if p < 1:
        raise ValueError("p must be at least 1")
    cap = _config.bp_class_cap() if cap is None else cap
    if table is not None:
        if space is None:
            space = make_uniform_space(table.point_count)
        family = ImplicitFamily.from_table(table, space)
    if family is not None:
        size = family.class_size
        atom_masks = [mask for mask, _ in family.atoms]
        atom_meas = [m for _, m in family.atoms]

        def measure_of(members: int) -> Fraction:
            return sum(
                (m for mask, m in zip(atom_masks, atom_meas) if mask & members == members),
                Fraction(0),
            )

        singles = [family.set_measure(f) for f in range(size)]
    elif intersection_measure is not None:
        if class_size is None:
            raise ValueError("class_size is required with intersection_measure")
        size = class_size

        def measure_of(members: int) -> Fraction:
            return as_fraction(
                intersection_measure(frozenset(f for f in range(size) if members >> f & 1))
            )

        singles = [measure_of(1 << f) for f in range(size)]
    else:
        raise ValueError("no family given")
    if size > cap:
        raise ValueError(f"inclusion-exclusion over {size} sets is above the cap of {cap}")
    prob = _inclusion_exclusion(size, measure_of, p)
    return TailResult(
        prob,
        "inclusion-exclusion",
        details={
            "p": p,
            "class_size": size,
            "max_single": max(s**p for s in singles),
            "sum_single": sum((s**p for s in singles), Fraction(0)),
            "rho_hat": max(singles),
        },
    )


# ---------------------------------------------------------------------------
# indicators of small subsets under the uniform distribution
# ---------------------------------------------------------------------------

def intro_Pn_exact(N: int, L: int, n: int) -> Fraction:
    """P(at most L distinct values among n uniform draws from N points)."""
    if n == 0:
        return Fraction(1)
    favourable = sum(
        math.comb(N, i) * math.factorial(i) * stirling2(n, i) for i in range(1, min(L, n) + 1)
    )
    return Fraction(favourable, N**n)


def intro_example_Pn(N: int, L: int, n: int) -> TailResult:
    """P(sup_f S_n(f) >= n) for indicators of subsets of size <= L, with both bounds."""
    if not 1 <= L <= N:
        raise ValueError(f"need 1 <= L <= N, got L={L}, N={N}")
    if n < 0:
        raise ValueError("n must be nonnegative")
    prob = intro_Pn_exact(N, L, n)
    rho = Fraction(L, N)
    binomial_bound = math.comb(N, L) * rho**n
    power_bound = INTRO_EXAMPLE_C**L * rho ** (n - L)
    return TailResult(
        prob,
        "closed-form",
        compared_bounds=[
            compare_bound("binom(N,L)*rho^n", prob, binomial_bound),
            compare_bound("4^L*rho^(n-L)", prob, power_bound),
        ],
        details={"N": N, "L": L, "n": n, "rho": rho},
    )


@dataclass(frozen=True)
class IntroTailBound:
    binomial_bound: Fraction  # C(n, u) * P_u
    closed_form_bound: Fraction  # 4^L n^u rho^(u - L)
    exact_tail: Fraction | None


def intro_example_Pun_bound(
    N: int, L: int, n: int, u: int, exact_cap: int = 20_000
) -> IntroTailBound:
    """Both bounds on P(sup_f S_n(f) >= u), plus the exact value when affordable."""
    if not 0 <= u <= n:
        raise ValueError("need 0 <= u <= n")
    rho = Fraction(L, N)
    by_binomial = math.comb(n, u) * intro_Pn_exact(N, L, u)
    closed = INTRO_EXAMPLE_C**L * Fraction(n) ** u * rho ** (u - L)
    exact = None
    if u == 0:
        exact = Fraction(1)
    else:
        try:
            table = subset_indicator_class(N, L, cap=exact_cap)
            exact = exact_sup_tail(table, make_uniform_space(N), n, u, cap=10**6).probability
        except ValueError:
            exact = None
    return IntroTailBound(by_binomial, closed, exact)


# ---------------------------------------------------------------------------
# closed-form bounds
# ---------------------------------------------------------------------------

def _check_bound_args(D, rho: Fraction, x) -> None:
    if (D if isinstance(D, float) else Fraction(D)) < 1:
        raise ValueError("D must be at least 1")
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if x <= 0:
        raise ValueError("u or p must be positive")


def _bound_log(factor: int, D, rho: RationalLike, x, exponent: Fraction) -> float:
    rho_f = as_fraction(rho)
    _check_bound_args(D, rho_f, x)
    ln_d = log_fraction(Fraction(D)) if not isinstance(D, float) else math.log(D)
    return math.log(factor) + ln_d + float(exponent * as_fraction(x)) * log_fraction(rho_f)


def _bound_upper(factor: int, D, rho: RationalLike, x, exponent: Fraction) -> float:
    """factor * D * rho^(exponent * x) as an interval, returned as its upper end."""
    rho_f = as_fraction(rho)
    _check_bound_args(D, rho_f, x)
    with iv_precision(128):
        d = ivq(Fraction(D)) if not isinstance(D, float) else iv.mpf(D)
        e = exponent * as_fraction(x)
        value = factor * d * iv.exp(ivq(e) * log_q(rho_f))
        up = float_up(hi(value))
    # a bound below the smallest subnormal is still positive
    return up if up > 0 else math.ulp(0.0)


def bound_theorem1_log10(D, rho, u) -> float:
    return _bound_log(1, D, rho, u, THEOREM1_EXPONENT) / _LN10


def bound_theorem1(D, rho, u) -> float:
    """D * rho^(u/50), rounded up."""
    return _bound_upper(1, D, rho, u, THEOREM1_EXPONENT)


def bound_theorem1A_log10(D, rho, p) -> float:
    return _bound_log(THEOREM1A_FACTOR, D, rho, p, THEOREM1A_EXPONENT) / _LN10


def bound_theorem1A(D, rho, p) -> float:
    """2 * D * rho^(p/4), rounded up."""
    return _bound_upper(THEOREM1A_FACTOR, D, rho, p, THEOREM1A_EXPONENT)


def bound_lemma21_log10(D, rho, p) -> float:
    return _bound_log(1, D, rho, p, LEMMA21_EXPONENT) / _LN10


def bound_lemma21(D, rho, p) -> float:
    """D * rho^(p/4), rounded up."""
    return _bound_upper(1, D, rho, p, LEMMA21_EXPONENT)


def bound_lemma31_log10(D, rho, u) -> float:
    return _bound_log(LEMMA31_FACTOR, D, rho, u, LEMMA31_EXPONENT) / _LN10


def bound_lemma31(D, rho, u) -> float:
    """2 * D * rho^(u/25), rounded up."""
    return _bound_upper(LEMMA31_FACTOR, D, rho, u, LEMMA31_EXPONENT)


BOUNDS = {
    "thm1": (bound_theorem1, bound_theorem1_log10),
    "thm1A": (bound_theorem1A, bound_theorem1A_log10),
    "lemma21": (bound_lemma21, bound_lemma21_log10),
    "lemma31": (bound_lemma31, bound_lemma31_log10),
}


# ---------------------------------------------------------------------------
# hypotheses of each statement
# ---------------------------------------------------------------------------

def regime_check(
    D: RationalLike,
    L: RationalLike,
    rho: RationalLike,
    n: int | None = None,
    u_or_p: RationalLike | None = None,
    context: str = "thm1",
    N0: int | None = None,
    N: int | None = None,
) -> list[Hypothesis]:
    """Evaluate each hypothesis of a statement exactly.

    Irrational powers of rho are compared after raising both sides to an
    integer power.  Hypotheses that belong to neighbouring statements but
    disagree with this one are appended with ``informational=True``.
    """
    D, L, rho = as_fraction(D), as_fraction(L), as_fraction(rho)
    x = None if u_or_p is None else as_fraction(u_or_p)
    out = [
        Hypothesis("D >= 1", D >= 1),
        Hypothesis("L >= 1", L >= 1),
    ]

    def window(N0: int) -> list[Hypothesis]:
        return [
            Hypothesis("rho^(-3/2)/16 < N0", 256 * N0**2 * rho**3 > 1),
            Hypothesis("N0 <= rho^(-3/2)/8", 64 * N0**2 * rho**3 <= 1),
        ]

    if context == "thm1":
        out.append(Hypothesis("0 < rho", rho > 0))
        if n is not None:
            out.append(Hypothesis("n >= 2", n >= 2))
            out.append(Hypothesis("rho <= n^-200", rho * Fraction(n) ** 200 <= 1))
        if x is not None:
            out.append(Hypothesis("u > 41L", x > 41 * L))
            out.append(Hypothesis("u >= 40L (level-count form)", x >= 40 * L, True))
            out.append(Hypothesis("u > 8L (hat-space step)", x > 8 * L, True))
            out.append(Hypothesis("u >= (L+1)/4 (constant absorption)", 4 * x >= L + 1, True))
    elif context == "thm1A":
        out.append(Hypothesis("0 < rho", rho > 0))
        out.append(Hypothesis("rho <= 1/1000", rho <= Fraction(1, 1000)))
        out.append(Hypothesis("rho <= L^-20", rho * L**20 <= 1))
        if x is not None:
            out.append(Hypothesis("p >= 2L", x >= 2 * L))
            out.append(Hypothesis("p <= rho^(-1/100)", rho > 0 and x**100 * rho <= 1))
        if N0 is not None:
            out.extend(window(N0))
        if N is not None and N0 is not None:
            ratio = Fraction(N, N0)
            power_of_two = ratio.denominator == 1 and ratio.numerator & (ratio.numerator - 1) == 0
            out.append(Hypothesis("N = 2^k N0", power_of_two))
    elif context == "lemma21":
        out.append(Hypothesis("0 < rho < 1", 0 < rho < 1))
        if x is not None:
            out.append(Hypothesis("p >= 2L", x >= 2 * L))
        if N0 is not None:
            out.append(Hypothesis("N0 <= rho^(-3/2)/8", 64 * N0**2 * rho**3 <= 1))
    elif context == "lemma31":
        out.append(Hypothesis("0 < rho < 1", 0 < rho < 1))
        if n is not None:
            out.append(Hypothesis("n >= 2", n >= 2))
            out.append(Hypothesis("rho <= n^-200", rho * Fraction(n) ** 200 <= 1))
        if N is not None:
            out.append(Hypothesis("N = 2^k", N > 0 and N & (N - 1) == 0))
            out.append(Hypothesis("N >= rho^(-3/2)", N**2 * rho**3 >= 1))
        if x is not None:
            out.append(Hypothesis("u >= 40L", x >= 40 * L))
            out.append(Hypothesis("u > 41L (headline form)", x > 41 * L, True))
            out.append(Hypothesis("u > 8L (hat-space step)", x > 8 * L, True))
    else:
        raise ValueError(f"unknown context {context!r}")
    return out


def in_regime(checks: Sequence[Hypothesis]) -> bool:
    return all(h.holds for h in checks if not h.informational)
