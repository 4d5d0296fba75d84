"""Dyadic truncation, level hit counts, value-cell discretization, dyadic
rounding of cell masses and the hat-space construction.

Everything here is exact rational arithmetic.  ``t_threshold`` evaluates a
floor of an expression in sqrt(2) exactly instead of through floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _config
from .rational import RationalLike, as_fraction, log10_fraction
from .space import FiniteSpace, FunctionTable, PartitionAlgebra, sup_mean
from .tail_exact import TailResult, bp_measure, enumerate_sup_tail, exact_sup_tail


# ---------------------------------------------------------------------------
# dyadic truncation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicDecomposition:
    base: FunctionTable
    n: int
    levels: int  # R with n < 2^R <= 2n
    truncated: tuple[FunctionTable, ...]  # f_j = min(2^-j, f), j = 1..R
    normalized: tuple[FunctionTable, ...]  # 2^j f_j

    def level_indicator(self, j: int) -> FunctionTable:
        """Rows 1 where f >= 2^-j, i.e. where the normalized level saturates."""
        return FunctionTable(
            tuple(tuple(Fraction(int(v == 1)) for v in row) for row in self.normalized[j - 1].values)
        )


def dyadic_levels(n: int) -> int:
    if n < 2:
        raise ValueError("n must be at least 2")
    return n.bit_length()


def dyadic_truncate(table: FunctionTable, n: int) -> DyadicDecomposition:
    R = dyadic_levels(n)
    truncated, normalized = [], []
    for j in range(1, R + 1):
        cap = Fraction(1, 2**j)
        rows = tuple(tuple(min(cap, v) for v in row) for row in table.values)
        truncated.append(FunctionTable(rows))
        normalized.append(FunctionTable(tuple(tuple(v * 2**j for v in row) for row in rows)))
    return DyadicDecomposition(table, n, R, tuple(truncated), tuple(normalized))


def level_counts(decomp: DyadicDecomposition, row: int, sample: Sequence[int]) -> tuple[int, ...]:
    """(H_1, ..., H_R) for one function: how many sample points reach 2^-j."""
    values = decomp.base.values[row]
    return tuple(
        sum(1 for x in sample if values[x] >= Fraction(1, 2**j))
        for j in range(1, decomp.levels + 1)
    )


@dataclass(frozen=True)
class DominationReport:
    trials: int
    violations: int
    min_slack: Fraction


def _draw_points(space: FiniteSpace, rng: np.random.Generator, size) -> np.ndarray:
    if space.weight_denominator < (1 << 62):
        cum = np.cumsum(np.array(space.integer_weights, dtype=np.int64))
        draws = rng.integers(0, space.weight_denominator, size=size, dtype=np.int64)
        return np.searchsorted(cum, draws, side="right")
    probs = np.array([float(w) for w in space.weights])
    return rng.choice(space.point_count, size=size, p=probs / probs.sum())


def domination_check(
    table: FunctionTable, space: FiniteSpace, n: int, trials: int, seed: int = 0
) -> DominationReport:
    """S_n(f) <= sum_j 2^(1-j) H_j(f) + 1 on random (row, sample) draws, exactly."""
    table.check_space(space)
    decomp = dyadic_truncate(table, n)
    rng = np.random.default_rng(seed)
    violations = 0
    min_slack = None
    for _ in range(trials):
        row = int(rng.integers(0, table.class_size))
        sample = [int(x) for x in _draw_points(space, rng, n)]
        s = sum((table.values[row][x] for x in sample), Fraction(0))
        H = level_counts(decomp, row, sample)
        rhs = sum((Fraction(2, 2**j) * h for j, h in enumerate(H, start=1)), Fraction(1))
        slack = rhs - s
        if slack < 0:
            violations += 1
        min_slack = slack if min_slack is None else min(min_slack, slack)
    return DominationReport(trials, violations, Fraction(0) if min_slack is None else min_slack)


def _floor_a_plus_b_sqrt2(a: Fraction, b: Fraction) -> int:
    def le(m: int) -> bool:  # m <= a + b*sqrt(2)
        q = m - a
        if b >= 0:
            return q <= 0 or q * q <= 2 * b * b
        return q <= 0 and q * q >= 2 * b * b

    m = math.floor(float(a) + float(b) * math.sqrt(2))
    while not le(m):
        m -= 1
    while le(m + 1):
        m += 1
    return m


def t_threshold(u: RationalLike, j: int) -> int:
    """floor((sqrt(2) - 1)/2 * (u - 1) * 2^(j/2)) + 1, evaluated exactly."""
    u = as_fraction(u)
    if u < 1 or j < 1:
        raise ValueError("need u >= 1 and j >= 1")
    if j % 2 == 0:
        c = (u - 1) * 2 ** (j // 2) / 2
        a, b = -c, c
    else:
        c = (u - 1) * 2 ** ((j - 1) // 2) / 2
        a, b = 2 * c, -c
    return _floor_a_plus_b_sqrt2(a, b) + 1


def dn_measure(
    table: FunctionTable, space: FiniteSpace, n: int, u: RationalLike, j: int, D: RationalLike = 1
) -> TailResult:
    """Exact measure of {sup_f H_j(f) >= t(j)} with the union-bound pieces alongside."""
    decomp = dyadic_truncate(table, n)
    if not 1 <= j <= decomp.levels:
        raise ValueError(f"j must lie in [1, {decomp.levels}]")
    t = t_threshold(u, j)
    indicators = decomp.level_indicator(j)
    if t > n:
        prob = Fraction(0)
    else:
        prob = exact_sup_tail(indicators, space, n, t).probability
    details = {"j": j, "t": t}
    rho = sup_mean(table, space)
    D = as_fraction(D)
    if rho > 0:
        # 2 D (8 n^5 rho)^(t/4)
        details["bound_log10"] = (
            math.log10(2) + log10_fraction(D) + t / 4 * log10_fraction(8 * Fraction(n) ** 5 * rho)
        )
    if t <= n and indicators.class_size <= _config.bp_class_cap():
        single = bp_measure(t, table=indicators, space=space).probability
        details["union_overcount"] = math.comb(n, t) * single
    return TailResult(prob, "exact-dp", details=details)


@dataclass(frozen=True)
class SubadditivityReport:
    lhs: Fraction
    terms: tuple[Fraction, ...]
    holds: bool

    @property
    def rhs(self) -> Fraction:
        return sum(self.terms, Fraction(0))


def subadditivity_check(
    table: FunctionTable, space: FiniteSpace, n: int, u: RationalLike
) -> SubadditivityReport:
    """P(sup_f S_n(f) > u) against the sum over levels of P(D_n(u, j))."""
    u = as_fraction(u)
    lhs = exact_sup_tail(table, space, n, u, strict=True).probability
    R = dyadic_levels(n)
    if u < 1:
        # t(j) needs u >= 1; the level events then carry no information
        terms = (Fraction(1),)
    else:
        terms = tuple(dn_measure(table, space, n, u, j).probability for j in range(1, R + 1))
    return SubadditivityReport(lhs, terms, lhs <= sum(terms, Fraction(0)))


# ---------------------------------------------------------------------------
# value cells and cell averages
# ---------------------------------------------------------------------------

def bin_index(value: Fraction, n: int) -> int:
    """1-based bin: [0, 1/n] is bin 1, ((j-1)/n, j/n] is bin j."""
    return max(1, math.ceil(value * n))


@dataclass(frozen=True)
class CellPartition:
    bin_count: int
    signatures: tuple[tuple[int, ...], ...]  # lexicographic order
    cells: tuple[tuple[int, ...], ...]
    masses: tuple[Fraction, ...]
    null_points: tuple[int, ...]  # points of zero-measure cells, dropped

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    def algebra(self) -> PartitionAlgebra:
        extra = (self.null_points,) if self.null_points else ()
        return PartitionAlgebra(
            self.cells + extra,
            self.masses + ((Fraction(0),) if extra else ()),
            self.signatures + (("null",) if extra else ()),
        )

    def upper_values(self) -> list[list[Fraction]]:
        """s(j)/n per cell and row (cells x rows)."""
        return [[Fraction(s, self.bin_count) for s in sig] for sig in self.signatures]


def cell_partition(table: FunctionTable, space: FiniteSpace, n: int) -> CellPartition:
    if n < 1:
        raise ValueError("bin count must be positive")
    table.check_space(space)
    groups: dict[tuple[int, ...], list[int]] = {}
    for x in range(table.point_count):
        sig = tuple(bin_index(row[x], n) for row in table.values)
        groups.setdefault(sig, []).append(x)
    sigs, cells, masses, null = [], [], [], []
    for sig in sorted(groups):
        pts = groups[sig]
        m = space.measure(pts)
        if m == 0:
            null.extend(pts)
            continue
        sigs.append(sig)
        cells.append(tuple(pts))
        masses.append(m)
    return CellPartition(n, tuple(sigs), tuple(cells), tuple(masses), tuple(sorted(null)))


def cell_mean_values(
    table: FunctionTable, space: FiniteSpace, cells: CellPartition
) -> list[list[Fraction]]:
    """Conditional mean of each row on each cell (cells x rows)."""
    out = []
    for pts, m in zip(cells.cells, cells.masses):
        out.append(
            [sum((space.weights[x] * row[x] for x in pts), Fraction(0)) / m for row in table.values]
        )
    return out


def cell_average(table: FunctionTable, space: FiniteSpace, cells: CellPartition) -> FunctionTable:
    """Each row replaced by its conditional mean on its cell; null points keep their values."""
    means = cell_mean_values(table, space, cells)
    rows = [list(row) for row in table.values]
    for c, pts in enumerate(cells.cells):
        for r in range(table.class_size):
            for x in pts:
                rows[r][x] = means[c][r]
    return FunctionTable(tuple(tuple(row) for row in rows))


# ---------------------------------------------------------------------------
# dyadic rounding and the hat space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoundedMeasure:
    grid_exponent: int
    original: tuple[Fraction, ...]
    masses: tuple[Fraction, ...]
    alphas: tuple[int, ...]
    betas: tuple[int, ...]


def round_measure(masses: Sequence[RationalLike], k: int) -> RoundedMeasure:
    """Round cumulative sums up to multiples of 2^-k; cell masses are the increments."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    ms = tuple(as_fraction(m) for m in masses)
    if any(m < 0 for m in ms) or sum(ms, Fraction(0)) != 1:
        raise ValueError("masses must be nonnegative and sum to 1")
    scale = 2**k
    betas, cum = [], Fraction(0)
    for m in ms:
        cum += m
        betas.append(math.ceil(cum * scale))
    alphas = [b - a for a, b in zip([0] + betas[:-1], betas)]
    return RoundedMeasure(
        k, ms, tuple(Fraction(a, scale) for a in alphas), tuple(alphas), tuple(betas)
    )


@dataclass(frozen=True)
class HatSpace:
    space: FiniteSpace
    table: FunctionTable
    block_of_point: tuple[int, ...]


def hat_space(
    rounded: RoundedMeasure,
    cells: CellPartition,
    cell_values: Sequence[Sequence[RationalLike]] | None = None,
) -> HatSpace:
    """Uniform space on 2^k points split into blocks of alpha(cell) points.

    Functions are constant on blocks, by default equal to s(j)/n (the upper
    end of the cell's bin); ``cell_values`` (cells x rows) overrides them.
    """
    if len(rounded.alphas) != cells.cell_count:
        raise ValueError("one rounded mass per cell required")
    size = 2**rounded.grid_exponent
    assert sum(rounded.alphas) == size, "alpha counts must fill the hat space"
    vals = cells.upper_values() if cell_values is None else [
        [as_fraction(v) for v in row] for row in cell_values
    ]
    block = [c for c, a in enumerate(rounded.alphas) for _ in range(a)]
    n_rows = len(vals[0]) if vals else 0
    rows = tuple(tuple(vals[c][r] for c in block) for r in range(n_rows))
    from .space import make_uniform_space

    return HatSpace(make_uniform_space(size), FunctionTable(rows), tuple(block))


@dataclass(frozen=True)
class HatCheck:
    cell_side: Fraction
    hat_side: Fraction
    hat_brute: Fraction | None
    equal: bool


def _cell_model(values: list[list[Fraction]], masses: Sequence[Fraction]):
    """Function table and space with one point per cell."""
    rows = [[values[c][r] for c in range(len(values))] for r in range(len(values[0]))]
    return FunctionTable.from_rows(rows), FiniteSpace(tuple(masses))


def hat_distribution_check(
    table: FunctionTable,
    space: FiniteSpace,
    n: int,
    u: RationalLike,
    k: int,
    strict: bool = True,
    values: str = "average",
    brute_limit: int = 10**6,
) -> HatCheck:
    """Sup-tail under i.i.d. rounded cell masses equals the uniform hat-space tail.

    ``values="average"`` uses the cell means on both sides, ``"upper"`` uses
    s(j)/n on both sides.
    """
    cells = cell_partition(table, space, n)
    rounded = round_measure(cells.masses, k)
    if values == "average":
        vals = cell_mean_values(table, space, cells)
    elif values == "upper":
        vals = cells.upper_values()
    else:
        raise ValueError("values must be 'average' or 'upper'")
    cell_table, cell_space = _cell_model(vals, rounded.masses)
    cell_side = exact_sup_tail(cell_table, cell_space, n, u, strict).probability
    hat = hat_space(rounded, cells, vals)
    hat_side = exact_sup_tail(hat.table, hat.space, n, u, strict).probability
    brute = None
    if (2**k) ** n <= brute_limit:
        brute = enumerate_sup_tail(hat.table, hat.space, n, u, strict)
    equal = cell_side == hat_side and (brute is None or brute == hat_side)
    return HatCheck(cell_side, hat_side, brute, equal)


@dataclass(frozen=True)
class ConvergenceRow:
    k: int
    tail_k: Fraction
    error: Fraction
    tv_envelope: Fraction  # n * total variation between rounded and true cell masses
    coarse_envelope: Fraction  # n * Q * 2^-k
    within: bool


def convergence_sweep(
    table: FunctionTable,
    space: FiniteSpace,
    n: int,
    u: RationalLike,
    ks: Sequence[int] = range(4, 17),
    strict: bool = True,
) -> tuple[Fraction, list[ConvergenceRow]]:
    """Tail of the cell-averaged class under rounded masses as k grows."""
    cells = cell_partition(table, space, n)
    vals = cell_mean_values(table, space, cells)
    t, s = _cell_model(vals, cells.masses)
    limit = exact_sup_tail(t, s, n, u, strict).probability
    rows = []
    for k in ks:
        rounded = round_measure(cells.masses, k)
        t_k, s_k = _cell_model(vals, rounded.masses)
        tail_k = exact_sup_tail(t_k, s_k, n, u, strict).probability
        err = abs(tail_k - limit)
        tv = sum((abs(a - b) for a, b in zip(rounded.masses, cells.masses)), Fraction(0)) / 2
        rows.append(
            ConvergenceRow(k, tail_k, err, n * tv, Fraction(n * cells.cell_count, 2**k), err <= n * tv)
        )
    return limit, rows


@dataclass(frozen=True)
class ShiftCheck:
    lhs: Fraction  # P(sup S_n(f) > u + 1)
    rhs: Fraction  # P(sup S_n(f~) > u)
    holds: bool


def averaging_shift_check(
    table: FunctionTable, space: FiniteSpace, n: int, u: RationalLike
) -> ShiftCheck:
    """Replacing f by its cell average moves each S_n by at most 1."""
    u = as_fraction(u)
    cells = cell_partition(table, space, n)
    avg = cell_average(table, space, cells)
    lhs = exact_sup_tail(table, space, n, u + 1, strict=True).probability
    rhs = exact_sup_tail(avg, space, n, u, strict=True).probability
    return ShiftCheck(lhs, rhs, lhs <= rhs)
