import os
import subprocess
import sys
from itertools import combinations

import numpy as np
import pytest

from suptail import _kernels

pytestmark = pytest.mark.skipif(not _kernels.NUMBA_KERNELS, reason="numba not importable")


def test_sup_hits_parity(rng):
    for _ in range(20):
        values = rng.integers(0, 20, size=(int(rng.integers(1, 5)), 7), dtype=np.int64)
        idx = rng.integers(0, 7, size=(500, int(rng.integers(1, 5))), dtype=np.int64)
        thr = np.int64(rng.integers(0, 40))
        for strict in (False, True):
            a = _kernels.NUMPY_KERNELS["sup_hits"](values, idx, thr, strict)
            b = _kernels.NUMBA_KERNELS["sup_hits"](values, idx, thr, strict)
            assert int(a) == int(b)


def test_enum_hit_weight_parity(rng):
    for _ in range(20):
        values = rng.integers(0, 10, size=(int(rng.integers(1, 4)), 4), dtype=np.int64)
        weights = rng.integers(1, 5, size=4, dtype=np.int64)
        n = int(rng.integers(1, 5))
        thr = np.int64(rng.integers(0, 10 * n))
        for strict in (False, True):
            a = _kernels.NUMPY_KERNELS["enum_hit_weight"](values, weights, n, thr, strict)
            b = _kernels.NUMBA_KERNELS["enum_hit_weight"](values, weights, n, thr, strict)
            assert int(a) == int(b)


def test_count_subsets_parity(rng):
    for _ in range(20):
        values = rng.integers(0, 5, size=(int(rng.integers(1, 4)), 10), dtype=np.int64)
        k = int(rng.integers(0, 6))
        thr = np.int64(rng.integers(0, 15))
        a = _kernels.NUMPY_KERNELS["count_subsets_ge"](values, k, thr)
        b = _kernels.NUMBA_KERNELS["count_subsets_ge"](values, k, thr)
        brute = sum(1 for c in combinations(range(10), k)
                    if max(int(values[r, list(c)].sum()) for r in range(values.shape[0])) >= thr)
        assert int(a) == int(b) == brute


def test_max_traces_parity(rng):
    for _ in range(15):
        masks = np.unique(rng.integers(0, 1 << 9, size=int(rng.integers(1, 25)), dtype=np.int64))
        for n in range(0, 10):
            a = _kernels.NUMPY_KERNELS["max_traces"](masks, 9, n)
            b = _kernels.NUMBA_KERNELS["max_traces"](masks, 9, n)
            assert int(a) == int(b)


@pytest.mark.parametrize("flag,expected", [("1", "numpy"), ("0", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, SUPTAIL_DISABLE_NUMBA=flag)
    out = subprocess.run(
        [sys.executable, "-c", "import suptail; print(suptail.ACTIVE_BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected


def test_numpy_backend_end_to_end():
    code = (
        "from fractions import Fraction as F\n"
        "from suptail import exact_sup_tail, enumerate_sup_tail, FunctionTable, make_uniform_space\n"
        "t = FunctionTable.from_rows([[int(i == j) for i in range(4)] for j in range(4)])\n"
        "s = make_uniform_space(4)\n"
        "print(exact_sup_tail(t, s, 2, 2).probability, enumerate_sup_tail(t, s, 2, 2))\n"
    )
    env = dict(os.environ, SUPTAIL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                         text=True, check=True)
    assert out.stdout.split() == ["1/4", "1/4"]
