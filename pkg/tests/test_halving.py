import math
from fractions import Fraction

import pytest

from suptail import halving as hv
from suptail.space import FunctionTable


def test_schedule_single_level():
    s = hv.build_schedule(Fraction(1, 100), 64, 0)
    assert len(s.levels) == 1
    lv = s.levels[0]
    assert (lv.k, lv.N_k, lv.C_k) == (0, 64, Fraction(101, 100))
    assert lv.rho_low <= 0.01 <= lv.rho_high


def test_schedule_sizes_and_monotonicity():
    s = hv.build_schedule(Fraction(1, 10**3), 2048, 4)
    assert s.levels[2].N_k == 8192
    assert all(b.rho_high < a.rho_low for a, b in zip(s.levels, s.levels[1:]))
    assert all(lv.C_k == math.prod(1 + Fraction(1, 10**3) / 2**j for j in range(lv.k + 1))
               for lv in s.levels)
    assert all(lv.C_k_below_exp for lv in s.levels)


def test_rho_one_at_boundary_is_below_half():
    s = hv.build_schedule(Fraction(1, 10**3), 2048, 1)
    lv = s.levels[1]
    assert lv.rho_low == pytest.approx(4.636803539532426e-4, rel=1e-12)
    assert lv.rho_high < 5e-4 and not lv.rho_at_least_half
    assert s.in_window


def test_default_N0_lands_in_window():
    for e in (3, 6, 12, 40, 100):
        rho = Fraction(1, 10**e)
        N0 = hv.default_N0(rho)
        assert hv.build_schedule(rho, N0, 0).in_window


def test_C_k_at_most_two_for_small_rho():
    for num in range(1, 35):
        rho = Fraction(num, 100)
        for k in range(0, 12):
            assert hv.C_k(rho, k) <= 2


def test_randomized_sum_examples():
    const = [Fraction(1, 3)] * 4
    assert hv.randomized_sum(const, hv.PairingState.identity(4, (1, -1))) == 0
    assert hv.randomized_sum([1, 0], hv.PairingState.identity(2)) == 1
    assert hv.randomized_sum([1, 0, 0, 1], hv.PairingState.identity(4, (1, 1))) == 0


def test_pairing_validation():
    with pytest.raises(ValueError):
        hv.PairingState(((0, 1), (1, 2)), (1, 1))
    with pytest.raises(ValueError):
        hv.PairingState(((0, 1),), (2,))
    p = hv.PairingState.random(10, seed=5)
    assert p.half_size == 5 and len(p.selected_half) == 5
    assert p == hv.PairingState.random(10, seed=5)


def test_hoeffding_examples():
    b = hv.hoeffding_bounds([1], Fraction(2, 5))
    assert b.bound_a == pytest.approx(math.exp(-0.32), rel=1e-15) and b.bound_a >= math.exp(-0.32)
    zero = hv.hoeffding_bounds([0, 0], Fraction(1, 2))
    assert zero.degenerate and zero.bound_a == 1.0
    b = hv.hoeffding_bounds([1, 0], 1, N_k=2, rho_next=Fraction(1, 4))
    assert b.bound_b == pytest.approx(math.exp(-1), rel=1e-15) and b.bound_b_valid
    with pytest.raises(ValueError):
        hv.hoeffding_bounds([1], 0)


def test_exact_Uk_tail_examples():
    assert hv.exact_Uk_tail([1, 0], hv.PairingState.identity(2), Fraction(2, 5)) == Fraction(1, 2)
    assert hv.exact_Uk_tail([Fraction(1, 2)] * 6, hv.PairingState.identity(6), Fraction(1, 10)) == 0
    assert hv.exact_Uk_tail([1, 0, 1, 0], hv.PairingState.identity(4), 1) == 0


def test_count_bad_halves_examples():
    t = FunctionTable.from_rows([[1, 1, 0, 0], [0, Fraction(1, 2), 1, 0]])
    assert hv.count_bad_halves(t, 0) == math.comb(4, 2)
    assert hv.count_bad_halves(t, 3) == 0
    assert hv.count_bad_halves(FunctionTable.from_rows([[1, 1, 0, 0]]), 2) == 1
    with pytest.raises(ValueError, match="at most"):
        hv.count_bad_halves(FunctionTable.from_rows([[0] * 28]), 1)


def test_counting_factor_examples():
    assert hv.counting_factor(5, 0).direct == hv.counting_factor(5, 0).product_form == 1
    cf = hv.counting_factor(2, 1)
    assert cf.direct == cf.product_form == 4
    cf = hv.counting_factor(3, 2)
    assert cf.direct == 45 == 36 * Fraction(5, 4) == cf.product_form
    with pytest.raises(ValueError):
        hv.counting_factor(3, 4)


def test_variance_step(rng):
    for _ in range(100):
        n_half = int(rng.integers(1, 8))
        row = [Fraction(int(v), 7) for v in rng.integers(0, 8, 2 * n_half)]
        pairing = hv.PairingState.random(2 * n_half, int(rng.integers(10**6)))
        d = hv.pair_differences(row, pairing)
        assert sum(x * x for x in d) <= 2 * sum(row)


def test_statement_b_small(rng):
    for _ in range(10):
        n_half = int(rng.integers(2, 6))
        row = [Fraction(int(v), 4) for v in rng.integers(0, 5, 2 * n_half)]
        rho_next = max(sum(row) / (2 * n_half), Fraction(1, 16))
        for z in (Fraction(1, 4), Fraction(1), Fraction(2)):
            chk = hv.statement_b_check(row, rho_next, z)
            assert chk.hypothesis_holds and chk.holds


def test_chain_report_deep_regime_all_hold():
    rho = Fraction(1, 10**100)
    N0 = hv.default_N0(rho)
    for k in (0, 1, 3):
        steps = hv.chain_report(rho, N0, k, 2)
        assert len(steps) == 9
        assert all(s.holds for s in steps), [s.step for s in steps if not s.holds]


def test_chain_report_moderate_rho_breaks():
    # at 10^-12 the explicit constants do not close the induction yet
    rho = Fraction(1, 10**12)
    for k in (0, 1, 3):
        failed = {s.step for s in hv.chain_report(rho, hv.default_N0(rho), k, 2) if not s.holds}
        assert failed == {
            "entropy term <= absorbed half-sample tail",
            "exp(-2^{k/20} rho^{-1/20}/100) <= C_k rho^{p/4} 2^{-(k+1)} rho/3",
            "level-k bound implies level-(k+1) bound",
        }


def test_chain_report_boundary_and_degenerate():
    steps = hv.chain_report(Fraction(1, 10**3), 2048, 0, 2)
    by_name = {s.step: s.holds for s in steps}
    assert by_name["rho_{k+1} >= rho/2"] is False
    assert by_name["counting-factor identity"] is True
    only = hv.chain_report(Fraction(1, 10**3), 2048, 0, 0)
    assert [s.step for s in only] == ["counting-factor identity"] and only[0].holds
