"""Exact, Monte Carlo and interval-arithmetic tools for tails of suprema of
empirical sums over finite function classes.

Kernels run under numba when available; set ``SUPTAIL_DISABLE_NUMBA=1``
before import to use the pure-numpy path.
"""
from ._kernels import ACTIVE_BACKEND
from .covering import (
    check_vc_bound,
    exact_min_cover,
    fit_dense_params,
    greedy_cover,
    shatter_coefficient,
    vc_dimension,
)
from .dyadic import (
    cell_average,
    cell_partition,
    domination_check,
    dn_measure,
    dyadic_truncate,
    hat_distribution_check,
    hat_space,
    level_counts,
    round_measure,
    subadditivity_check,
    t_threshold,
)
from .halving import build_schedule, chain_report, counting_factor, exact_Uk_tail, hoeffding_bounds
from .space import FiniteSpace, FunctionTable, PartitionAlgebra, make_uniform_space, sup_mean
from .tail_exact import ImplicitFamily, bp_measure, enumerate_sup_tail, exact_sup_tail, regime_check
from .tail_mc import McConfig, mc_sup_tail, mc_vs_exact

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_BACKEND",
    "FiniteSpace",
    "FunctionTable",
    "ImplicitFamily",
    "McConfig",
    "PartitionAlgebra",
    "bp_measure",
    "build_schedule",
    "cell_average",
    "cell_partition",
    "chain_report",
    "check_vc_bound",
    "counting_factor",
    "dn_measure",
    "domination_check",
    "dyadic_truncate",
    "enumerate_sup_tail",
    "exact_Uk_tail",
    "exact_min_cover",
    "exact_sup_tail",
    "fit_dense_params",
    "greedy_cover",
    "hat_distribution_check",
    "hat_space",
    "hoeffding_bounds",
    "level_counts",
    "make_uniform_space",
    "mc_sup_tail",
    "mc_vs_exact",
    "regime_check",
    "round_measure",
    "shatter_coefficient",
    "subadditivity_check",
    "sup_mean",
    "t_threshold",
    "vc_dimension",
]
