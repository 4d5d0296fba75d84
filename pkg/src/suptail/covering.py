"""L1 covering numbers, dense-parameter fitting and VC shatter data.

Covering computations are exact: distances are rationals and a row counts
as covered only when its distance to a center is strictly below epsilon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _config, _kernels
from .rational import RationalLike, as_fraction, round_up
from .space import FiniteSpace, FunctionTable, atoms_of_level_sets, make_uniform_space

_DIRICHLET_GRID = 1 << 20


@dataclass(frozen=True)
class CoverCertificate:
    epsilon: Fraction
    center_row_indices: tuple[int, ...]
    worst_gap: Fraction

    @property
    def size(self) -> int:
        return len(self.center_row_indices)


@dataclass(frozen=True)
class CoverEvidence:
    epsilon: Fraction
    measure_id: str
    m_greedy: int
    m_exact: int | None

    @property
    def m(self) -> int:
        return self.m_exact if self.m_exact is not None else self.m_greedy


@dataclass
class DenseParams:
    parameter_D: Fraction | float
    exponent_L: int | Fraction | float
    evidence: list[CoverEvidence] = field(default_factory=list)
    per_exponent: dict = field(default_factory=dict)

    def implied_D(self, ev: CoverEvidence, L=None):
        return _scaled(ev.m, ev.epsilon, self.exponent_L if L is None else L)


@dataclass(frozen=True)
class VcRow:
    n: int
    traces: int
    bound: Fraction
    holds: bool


@dataclass
class VcParams:
    parameter_B: Fraction
    exponent_K: int
    per_n_report: list[VcRow] = field(default_factory=list)


# ---------------------------------------------------------------------------
# distances and covers
# ---------------------------------------------------------------------------

def l1_distance(
    row_a: Sequence[Fraction], row_b: Sequence[Fraction], weights: Sequence[Fraction]
) -> Fraction:
    if not len(row_a) == len(row_b) == len(weights):
        raise ValueError("rows and weights must have equal length")
    return sum((w * abs(a - b) for a, b, w in zip(row_a, row_b, weights)), Fraction(0))


def distance_matrix(table: FunctionTable, weights: Sequence[Fraction]) -> list[list[Fraction]]:
    rows = table.values
    r = len(rows)
    if any(len(row) != len(weights) for row in rows):
        raise ValueError("rows and weights must have equal length")
    # integer numerators over one common denominator; a single division per pair
    wden = math.lcm(*(as_fraction(w).denominator for w in weights)) if weights else 1
    vden = table.value_denominator
    iw = [int(as_fraction(w) * wden) for w in weights]
    iv = [[int(v * vden) for v in row] for row in rows]
    den = wden * vden
    dist = [[Fraction(0)] * r for _ in range(r)]
    for i in range(r):
        for j in range(i + 1, r):
            num = sum(w * abs(a - b) for a, b, w in zip(iv[i], iv[j], iw))
            dist[i][j] = dist[j][i] = Fraction(num, den)
    return dist


def _weights_of(table: FunctionTable, measure) -> tuple[Fraction, ...]:
    if measure is None:
        return make_uniform_space(table.point_count).weights
    if isinstance(measure, FiniteSpace):
        weights = measure.weights
    else:
        weights = tuple(as_fraction(w) for w in measure)
    if len(weights) != table.point_count:
        raise ValueError("measure length does not match the class")
    return weights


def _check_epsilon(epsilon: Fraction) -> None:
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")


def greedy_cover(
    table: FunctionTable, measure=None, epsilon: RationalLike = 1, dist=None
) -> CoverCertificate:
    """Farthest-point greedy epsilon-net drawn from the class itself.

    Starts from row 0 and keeps adding the row farthest from the current
    centers (lowest index on ties) until every gap is below epsilon.
    """
    eps = as_fraction(epsilon)
    _check_epsilon(eps)
    if dist is None:
        dist = distance_matrix(table, _weights_of(table, measure))
    centers = [0]
    gaps = list(dist[0])
    while True:
        worst = max(gaps)
        if worst < eps:
            return CoverCertificate(eps, tuple(centers), worst)
        pick = gaps.index(worst)
        centers.append(pick)
        gaps = [min(g, d) for g, d in zip(gaps, dist[pick])]


def exact_min_cover(
    table: FunctionTable, measure=None, epsilon: RationalLike = 1, row_cap: int | None = None,
    dist=None,
) -> int:
    """Smallest number of rows whose open epsilon-balls cover the class."""
    row_cap = _config.min_cover_row_cap() if row_cap is None else row_cap
    r = table.class_size
    if r > row_cap:
        raise ValueError(f"exhaustive cover search supports at most {row_cap} rows, got {r}")
    eps = as_fraction(epsilon)
    _check_epsilon(eps)
    if dist is None:
        dist = distance_matrix(table, _weights_of(table, measure))
    full = (1 << r) - 1
    balls = []
    for c in range(r):
        mask = 0
        for j in range(r):
            if dist[c][j] < eps:
                mask |= 1 << j
        balls.append(mask)
    for k in range(1, r + 1):
        for combo in combinations(balls, k):
            acc = 0
            for m in combo:
                acc |= m
            if acc == full:
                return k
    raise AssertionError("the full row set always covers")  # pragma: no cover


# ---------------------------------------------------------------------------
# dense-parameter fitting
# ---------------------------------------------------------------------------

def _scaled(m: int, epsilon: Fraction, L) -> Fraction | float:
    """m * epsilon^L, exact for integral L, rounded up otherwise."""
    Lf = as_fraction(L) if not isinstance(L, float) else L
    if isinstance(Lf, Fraction) and Lf.denominator == 1:
        return m * epsilon ** int(Lf)
    return round_up(m * float(epsilon) ** float(L))


def _dirichlet_measure(rng: np.random.Generator, size: int) -> tuple[Fraction, ...]:
    draw = rng.dirichlet(np.ones(size))
    ints = np.floor(draw * _DIRICHLET_GRID).astype(np.int64)
    ints[int(np.argmax(draw))] += _DIRICHLET_GRID - int(ints.sum())
    return tuple(Fraction(int(v), _DIRICHLET_GRID) for v in ints)


def _measure_family(table: FunctionTable, rng, dirichlet_draws: int):
    n = table.point_count
    yield "uniform", make_uniform_space(n).weights
    part = atoms_of_level_sets(table, Fraction(1, 2))
    for i, atom in enumerate(part.atoms):
        if len(atom) == n and i == 0:
            continue  # same as the uniform measure
        members = set(atom)
        w = Fraction(1, len(atom))
        yield f"atom:{i}", tuple(w if x in members else Fraction(0) for x in range(n))
    for i in range(dirichlet_draws):
        yield f"dirichlet:{i}", _dirichlet_measure(rng, n)


def fit_dense_params(
    table: FunctionTable,
    epsilon_grid: Iterable[RationalLike],
    exponent_candidates: Iterable = (1, 2, 3, 4),
    dirichlet_draws: int = 64,
    hill_steps: int = 20,
    seed: int = 0,
    row_cap: int | None = None,
) -> DenseParams:
    """Lower-bound certificate for (D, L) from a finite family of measures.

    The family is the uniform measure, the uniform measure on each atom of
    the level-set algebra at 1/2, ``dirichlet_draws`` Dirichlet(1, ..., 1)
    draws and ``hill_steps`` steps of coordinate hill-climbing started from
    the worst draw.  For each candidate L, D(L) = max(1, max m * eps^L) over
    the evidence; the candidate with the smallest D(L) wins (smallest L on
    ties).  Only finitely many measures are tried, so the true worst case
    can only be larger.
    """
    eps_grid = [as_fraction(e) for e in epsilon_grid]
    candidates = list(exponent_candidates)
    if not eps_grid or not candidates:
        raise ValueError("epsilon_grid and exponent_candidates must be nonempty")
    for e in eps_grid:
        _check_epsilon(e)
    if any(as_fraction(L) < 1 for L in candidates if not isinstance(L, float)) or any(
        L < 1 for L in candidates if isinstance(L, float)
    ):
        raise ValueError("exponents must be at least 1")
    row_cap = _config.min_cover_row_cap() if row_cap is None else row_cap
    exact_ok = table.class_size <= row_cap
    rng = np.random.default_rng(seed)
    L_ref = min(candidates)

    evidence: list[CoverEvidence] = []

    def evaluate(measure_id: str, weights) -> Fraction | float:
        dist = distance_matrix(table, weights)
        worst = Fraction(0)
        for eps in eps_grid:
            g = greedy_cover(table, epsilon=eps, dist=dist).size
            m = exact_min_cover(table, epsilon=eps, row_cap=row_cap, dist=dist) if exact_ok else None
            ev = CoverEvidence(eps, measure_id, g, m)
            evidence.append(ev)
            worst = max(worst, _scaled(ev.m, eps, L_ref))
        return worst

    best_score, best_weights = None, None
    for measure_id, weights in _measure_family(table, rng, dirichlet_draws):
        score = evaluate(measure_id, weights)
        if best_score is None or score > best_score:
            best_score, best_weights = score, weights

    # coordinate hill-climbing: move a dyadic chunk of mass between two points
    current = list(best_weights)
    n = table.point_count
    for step in range(hill_steps):
        if n < 2:
            break
        src, dst = (int(v) for v in rng.choice(n, size=2, replace=False))
        if current[src] == 0:
            continue
        delta = current[src] / 2
        trial = list(current)
        trial[src] -= delta
        trial[dst] += delta
        score = evaluate(f"hill:{step}", tuple(trial))
        if score >= best_score:
            best_score, current = score, trial

    per_exponent = {}
    for L in candidates:
        d = max(_scaled(ev.m, ev.epsilon, L) for ev in evidence)
        per_exponent[L] = max(d, Fraction(1)) if isinstance(d, Fraction) else max(d, 1.0)
    chosen = min(candidates, key=lambda L: (per_exponent[L], L))
    return DenseParams(per_exponent[chosen], chosen, evidence, per_exponent)


def cover_report_rows(params: DenseParams) -> list[tuple]:
    """(epsilon, measure_id, m_greedy, m_exact_or_blank, D_implied) per evidence entry."""
    return [
        (ev.epsilon, ev.measure_id, ev.m_greedy, "" if ev.m_exact is None else ev.m_exact,
         params.implied_D(ev))
        for ev in params.evidence
    ]


# ---------------------------------------------------------------------------
# VC machinery
# ---------------------------------------------------------------------------

def _masks(set_system: Iterable[Iterable[int]], ground_size: int | None) -> tuple[np.ndarray, int]:
    sets = [frozenset(s) for s in set_system]
    if not sets:
        raise ValueError("empty set system")
    top = max((max(s) for s in sets if s), default=-1) + 1
    ground = top if ground_size is None else ground_size
    if ground < top:
        raise ValueError("a set contains a point outside the ground set")
    cap = _config.shatter_ground_cap()
    if ground > cap:
        raise ValueError(f"ground set of {ground} points is above the cap of {cap}")
    masks = sorted({sum(1 << x for x in s) for s in sets})
    return np.array(masks, dtype=np.int64), ground


def shatter_coefficient(
    set_system: Iterable[Iterable[int]], n: int, ground_size: int | None = None
) -> int:
    """Max over n-point subsets S of the number of distinct traces S & D."""
    masks, ground = _masks(set_system, ground_size)
    if not 0 <= n <= ground:
        raise ValueError(f"n must lie in [0, {ground}]")
    return int(_kernels.max_traces(masks, ground, n))


def vc_dimension(set_system: Iterable[Iterable[int]], ground_size: int | None = None) -> int:
    masks, ground = _masks(set_system, ground_size)
    dim = 0
    for n in range(1, ground + 1):
        if int(_kernels.max_traces(masks, ground, n)) != 1 << n:
            break
        dim = n
    return dim


def check_vc_bound(
    set_system: Iterable[Iterable[int]],
    B: RationalLike,
    K: int,
    n_range: Iterable[int],
    ground_size: int | None = None,
) -> VcParams:
    """Per-n comparison of the trace count with B * n^K; a report, never an assertion."""
    B = as_fraction(B)
    if B <= 0 or K < 1:
        raise ValueError("need B > 0 and K >= 1")
    masks, ground = _masks(set_system, ground_size)
    rows = []
    for n in n_range:
        if not 1 <= n <= ground:
            raise ValueError(f"n={n} outside [1, {ground}]")
        traces = int(_kernels.max_traces(masks, ground, n))
        bound = B * n**K
        rows.append(VcRow(n, traces, bound, traces <= bound))
    return VcParams(B, K, rows)


def subset_trace_count(n: int, L: int) -> int:
    """Closed form for traces of the <= L subsets on n points: sum_{i<=L} C(n, i)."""
    return sum(math.comb(n, i) for i in range(0, min(L, n) + 1))
