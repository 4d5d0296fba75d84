from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from suptail import dyadic as dy
from suptail.space import FiniteSpace, FunctionTable, make_uniform_space

from conftest import brute_tail, random_instance


def test_dyadic_truncate_examples():
    t = FunctionTable.from_rows([[0, 1, Fraction(3, 10)]])
    d = dy.dyadic_truncate(t, 8)
    assert d.levels == 4  # 8 < 16 <= 16
    assert d.truncated[0].values[0][0] == 0 and d.normalized[0].values[0][0] == 0
    assert d.truncated[2].values[0][1] == Fraction(1, 8) and d.normalized[2].values[0][1] == 1
    assert d.truncated[0].values[0][2] == Fraction(3, 10)
    assert d.normalized[0].values[0][2] == Fraction(3, 5)
    with pytest.raises(ValueError):
        dy.dyadic_truncate(t, 1)


@pytest.mark.parametrize("n", range(2, 70))
def test_level_count_range(n):
    R = dy.dyadic_levels(n)
    assert n < 2**R <= 2 * n


def test_level_counts_examples():
    d = dy.dyadic_truncate(FunctionTable.from_rows([[0, 0, 0]]), 4)
    assert dy.level_counts(d, 0, [0, 1, 2, 0]) == (0, 0, 0)
    # n = 2 has R = 2; only 3/5 reaches 1/2, both reach 1/4
    d = dy.dyadic_truncate(FunctionTable.from_rows([[Fraction(3, 5), Fraction(2, 5)]]), 2)
    assert dy.level_counts(d, 0, [0, 1]) == (1, 2)
    d = dy.dyadic_truncate(FunctionTable.from_rows([[1, 1]]), 4)
    assert dy.level_counts(d, 0, [0, 1, 1, 0]) == (4, 4, 4)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 32), min_size=1, max_size=6), st.integers(2, 40))
def test_normalized_levels_saturate_exactly_at_threshold(vals, n):
    row = [Fraction(v, 32) for v in vals]
    d = dy.dyadic_truncate(FunctionTable.from_rows([row]), n)
    for j in range(1, d.levels + 1):
        for v, bar in zip(row, d.normalized[j - 1].values[0]):
            assert 0 <= bar <= 1
            assert (bar == 1) == (v >= Fraction(1, 2**j))


def test_domination_examples():
    zero = FunctionTable.from_rows([[0, 0]])
    assert dy.domination_check(zero, make_uniform_space(2), 3, 20, 0).violations == 0
    # f = (3/10, 3/10), n = 2, R = 2: S = 3/5, H_1 = 0, H_2 = 2, right side 2
    r = dy.domination_check(FunctionTable.from_rows([[Fraction(3, 10)] * 2]),
                            make_uniform_space(2), 2, 10, 0)
    assert r.violations == 0 and r.min_slack == Fraction(7, 5)
    # f = 1, n = 4, R = 3: S = 4 <= 4 + 2 + 1 + 1
    r = dy.domination_check(FunctionTable.from_rows([[1]]), make_uniform_space(1), 4, 3, 0)
    assert r.min_slack == 4


def test_t_threshold_examples():
    assert dy.t_threshold(1, 7) == 1
    assert dy.t_threshold(41, 1) == 12
    assert dy.t_threshold(41, 2) == 17
    with pytest.raises(ValueError):
        dy.t_threshold(Fraction(1, 2), 1)


def test_t_threshold_matches_high_precision():
    import mpmath
    mpmath.mp.dps = 60
    for u in [Fraction(k, 3) for k in range(3, 200, 7)]:
        for j in range(1, 12):
            x = (mpmath.sqrt(2) - 1) / 2 * (mpmath.mpf(u.numerator) / u.denominator - 1) \
                * mpmath.mpf(2) ** (mpmath.mpf(j) / 2)
            assert dy.t_threshold(u, j) == int(mpmath.floor(x)) + 1


def test_dn_measure_examples():
    space = FiniteSpace((Fraction(1, 2), Fraction(1, 2)))
    small = FunctionTable.from_rows([[Fraction(1, 8), Fraction(1, 5)]])
    assert dy.dn_measure(small, space, 2, 5, 1).probability == 0
    # u = 50 gives t(1) = 11 > n
    big = FunctionTable.from_rows([[1, 1]])
    assert dy.dn_measure(big, space, 2, 50, 1).probability == 0
    # t(1) = 2 needs u with floor(0.2071 (u-1) sqrt 2) = 1, e.g. u = 5
    assert dy.t_threshold(5, 1) == 2
    one = FunctionTable.from_rows([[1, 0]])
    res = dy.dn_measure(one, space, 2, 5, 1)
    assert res.probability == Fraction(1, 4)
    assert res.details["union_overcount"] == Fraction(1, 4)


def test_subadditivity_examples(four_singletons):
    table, space = four_singletons
    r = dy.subadditivity_check(table, space, 2, 3)
    assert r.lhs == 0 and r.holds
    r = dy.subadditivity_check(table, space, 2, 2)
    assert r.lhs == 0 and r.holds  # strict event: two hits are needed to exceed 2
    zero = FunctionTable.from_rows([[0, 0, 0]])
    r = dy.subadditivity_check(zero, make_uniform_space(3), 3, 1)
    assert r.lhs == 0 and r.rhs == 0


def test_subadditivity_random(rng):
    for _ in range(10):
        table, space = random_instance(rng, max_points=4, max_rows=3, den=8)
        n = int(rng.integers(2, 5))
        u = Fraction(int(rng.integers(4, 8 * n)), 8)
        r = dy.subadditivity_check(table, space, n, u)
        assert r.lhs == brute_tail(table.values, space.weights, n, u, strict=True)
        assert r.holds


def test_cell_average_examples():
    space = make_uniform_space(2)
    t = FunctionTable.from_rows([[Fraction(1, 10), Fraction(1, 5)]])
    cells = dy.cell_partition(t, space, 5)
    assert cells.cell_count == 1
    avg = dy.cell_average(t, space, cells)
    assert avg.values[0] == (Fraction(3, 20), Fraction(3, 20))
    const = FunctionTable.from_rows([[Fraction(1, 2), Fraction(1, 2), 1]])
    cells = dy.cell_partition(const, make_uniform_space(3), 4)
    assert dy.cell_average(const, make_uniform_space(3), cells) == const


def test_cell_partition_drops_null_cells():
    space = FiniteSpace((Fraction(1, 2), Fraction(1, 2), Fraction(0)))
    t = FunctionTable.from_rows([[0, 0, 1]])
    cells = dy.cell_partition(t, space, 2)
    assert cells.cells == ((0, 1),) and cells.null_points == (2,)
    alg = cells.algebra()
    assert sorted(x for a in alg.atoms for x in a) == [0, 1, 2]


def test_cell_average_properties(rng):
    for _ in range(20):
        table, space = random_instance(rng, max_points=8, max_rows=4, den=12)
        n = int(rng.integers(1, 7))
        cells = dy.cell_partition(table, space, n)
        avg = dy.cell_average(table, space, cells)
        for ra, rb in zip(table.values, avg.values):
            assert max(abs(a - b) for a, b in zip(ra, rb)) <= Fraction(1, n)
            assert sum(w * a for w, a in zip(space.weights, ra)) == \
                sum(w * b for w, b in zip(space.weights, rb))
        assert list(cells.signatures) == sorted(cells.signatures)


def test_round_measure_examples():
    assert dy.round_measure([Fraction(1, 2)] * 2, 1).masses == (Fraction(1, 2),) * 2
    r = dy.round_measure([Fraction(3, 10), Fraction(3, 10), Fraction(2, 5)], 2)
    assert r.masses == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    assert r.betas == (2, 3, 4) and r.alphas == (2, 1, 1)
    assert max(abs(a - b) for a, b in zip(r.masses, r.original)) == Fraction(1, 5)
    with pytest.raises(ValueError):
        dy.round_measure([1], -1)
    with pytest.raises(ValueError):
        dy.round_measure([Fraction(1, 2)], 2)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=1, max_size=8).filter(any), st.integers(0, 14))
def test_round_measure_invariants(raw, k):
    masses = [Fraction(v, sum(raw)) for v in raw]
    r = dy.round_measure(masses, k)
    assert sum(r.masses) == 1
    for m, o, a in zip(r.masses, r.original, r.alphas):
        assert a >= 0 and m == Fraction(a, 2**k)
        assert abs(m - o) <= Fraction(1, 2**k)


def test_hat_space_examples():
    t = FunctionTable.from_rows([[0, 0, Fraction(1, 2), 1]])
    space = make_uniform_space(4)
    cells = dy.cell_partition(t, space, 3)
    assert cells.masses == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    r = dy.round_measure(cells.masses, 2)
    hat = dy.hat_space(r, cells)
    assert [hat.block_of_point.count(c) for c in range(3)] == [2, 1, 1]
    assert all(v in {Fraction(i, 3) for i in range(4)} for v in hat.table.values[0])
    one = FunctionTable.from_rows([[1, 1]])
    single = dy.cell_partition(one, make_uniform_space(2), 3)
    hat = dy.hat_space(dy.round_measure(single.masses, 3), single)
    assert set(hat.block_of_point) == {0}


def test_hat_distribution_examples():
    one = FunctionTable.from_rows([[Fraction(1, 2), Fraction(1, 2)]])
    hc = dy.hat_distribution_check(one, make_uniform_space(2), 2, Fraction(1, 2), 3)
    assert hc.equal
    two = FunctionTable.from_rows([[0, 1]])
    for u in (0, Fraction(1, 2), 1, Fraction(3, 2), 2):
        hc = dy.hat_distribution_check(two, make_uniform_space(2), 2, u, 1, strict=False)
        assert hc.equal and hc.hat_brute == hc.cell_side
    # three cells with masses (3/10, 3/10, 2/5), rounded at k = 2
    three = FunctionTable.from_rows([[0, 0, 0, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), 1, 1, 1, 1]])
    hc = dy.hat_distribution_check(three, make_uniform_space(10), 2, 1, 2)
    assert hc.equal and hc.cell_side == hc.hat_brute


def test_hat_distribution_random_both_value_choices(rng):
    for _ in range(8):
        table, space = random_instance(rng, max_points=5, max_rows=3, den=6)
        n = int(rng.integers(1, 4))
        u = Fraction(int(rng.integers(0, 2 * n + 1)), 2)
        for k in (1, 2, 3):
            for values in ("average", "upper"):
                assert dy.hat_distribution_check(table, space, n, u, k, values=values).equal


def test_average_tail_below_upper_tail(rng):
    # the cell mean never exceeds the bin's upper end s/n, so its tail is smaller
    for _ in range(10):
        table, space = random_instance(rng, max_points=5, max_rows=3, den=6)
        n = int(rng.integers(1, 4))
        u = Fraction(int(rng.integers(0, 2 * n + 1)), 2)
        for k in (2, 4):
            avg = dy.hat_distribution_check(table, space, n, u, k, values="average")
            up = dy.hat_distribution_check(table, space, n, u, k, values="upper")
            assert avg.cell_side <= up.cell_side


def test_convergence_sweep_within_envelope(rng):
    table, space = random_instance(rng, max_points=6, max_rows=3, den=7)
    limit, rows = dy.convergence_sweep(table, space, 3, Fraction(3, 2), range(4, 17))
    assert all(r.within for r in rows)
    assert rows[-1].error <= Fraction(3 * 6, 2**16)
    assert 0 <= limit <= 1


def test_averaging_shift(rng):
    for _ in range(10):
        table, space = random_instance(rng, max_points=5, max_rows=3, den=6)
        n = int(rng.integers(1, 4))
        u = Fraction(int(rng.integers(0, 2 * n + 1)), 2)
        assert dy.averaging_shift_check(table, space, n, u).holds
