"""Seeded Monte Carlo estimates of supremum tails with exact binomial CIs.

Samples are generated in fixed-size blocks; block ``b`` draws from a Philox
stream keyed by the seed with ``b`` in its counter.  A run is therefore a
pure function of (seed, sample_count) no matter how blocks are spread over
worker threads.

Plain Monte Carlo cannot see events of probability around rho^(u/50) with
rho <= n^-200; use it for moderate probabilities and oracle cross-checks.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from . import _kernels
from .rational import RationalLike, as_fraction
from .space import FiniteSpace, FunctionTable

BLOCK_SIZE = 8192
CONFIDENCE = 0.99
_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class McConfig:
    sample_count: int = 100_000
    seed: int = 0
    worker_count: int = 1

    def __post_init__(self):
        if self.sample_count < 1 or self.worker_count < 1:
            raise ValueError("sample_count and worker_count must be positive")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class McEstimate:
    hit_count: int
    sample_count: int
    estimate: float
    ci_low: float
    ci_high: float
    seed: int


@dataclass(frozen=True)
class McComparison:
    exact: Fraction | None
    mc: McEstimate
    inside_ci: bool | None
    note: str = ""


def clopper_pearson(hits: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    alpha = 1.0 - confidence
    low = 0.0 if hits == 0 else float(stats.beta.ppf(alpha / 2, hits, trials - hits + 1))
    high = 1.0 if hits == trials else float(stats.beta.ppf(1 - alpha / 2, hits + 1, trials - hits))
    return low, high


def _block_rng(seed: int, block: int) -> np.random.Generator:
    counter = np.array([0, 0, block, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def mc_sup_tail(
    table: FunctionTable,
    space: FiniteSpace,
    n: int,
    u: RationalLike,
    strict: bool = False,
    cfg: McConfig | None = None,
) -> McEstimate:
    """Estimate P(sup_f S_n(f) >= u) (``> u`` if strict) from i.i.d. n-tuples."""
    cfg = McConfig() if cfg is None else cfg
    table.check_space(space)
    if n < 1:
        raise ValueError("n must be at least 1")
    u = as_fraction(u)
    values = table.scaled(extra_factor=u.denominator, headroom=n)
    thr = u.numerator * table.value_denominator
    if values.dtype == object or abs(thr) >= _INT64_SAFE:
        raise ValueError("value denominators too large for int64 sampling")
    wden = space.weight_denominator
    if wden >= _INT64_SAFE:
        raise ValueError("weight denominator too large for exact integer sampling")
    cum = np.cumsum(np.array(space.integer_weights, dtype=np.int64))
    thr64 = np.int64(thr)

    n_blocks = -(-cfg.sample_count // BLOCK_SIZE)

    def run_block(b: int) -> int:
        size = min(BLOCK_SIZE, cfg.sample_count - b * BLOCK_SIZE)
        draws = _block_rng(cfg.seed, b).integers(0, wden, size=(size, n), dtype=np.int64)
        idx = np.searchsorted(cum, draws, side="right").astype(np.int64)
        return int(_kernels.sup_hits(values, idx, thr64, strict))

    if cfg.worker_count == 1:
        hits = sum(run_block(b) for b in range(n_blocks))
    else:
        with ThreadPoolExecutor(max_workers=cfg.worker_count) as pool:
            hits = sum(pool.map(run_block, range(n_blocks)))
    low, high = clopper_pearson(hits, cfg.sample_count)
    est = hits / cfg.sample_count
    return McEstimate(hits, cfg.sample_count, est, min(low, est), max(high, est), cfg.seed)


def mc_vs_exact(
    table: FunctionTable,
    space: FiniteSpace,
    n: int,
    u: RationalLike,
    cfg: McConfig | None = None,
    strict: bool = False,
) -> McComparison:
    """Run both estimators; flag an exact value outside the 99% interval."""
    from .tail_exact import exact_sup_tail

    mc = mc_sup_tail(table, space, n, u, strict, cfg)
    try:
        exact = exact_sup_tail(table, space, n, u, strict).probability
    except ValueError as exc:
        return McComparison(None, mc, None, f"exact side infeasible: {exc}")
    inside = Fraction(mc.ci_low) <= exact <= Fraction(mc.ci_high)
    return McComparison(exact, mc, inside, "" if inside else "exact value outside the CI")
