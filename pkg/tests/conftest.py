"""Shared fixtures and package-independent brute-force oracles."""
import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from suptail.space import FiniteSpace, FunctionTable, make_uniform_space


def brute_tail(rows, weights, n, u, strict=False):
    """P(max_r sum_l rows[r][x_l] >= u) by walking all N^n sequences."""
    total = Fraction(0)
    for seq in product(range(len(weights)), repeat=n):
        s = max(sum(r[x] for x in seq) for r in rows)
        if (s > u) if strict else (s >= u):
            total += math.prod((weights[x] for x in seq), start=Fraction(1))
    return total


def random_instance(rng, max_points=6, max_rows=4, den=4, indicator=False, uniform=False):
    N = int(rng.integers(1, max_points + 1))
    R = int(rng.integers(1, max_rows + 1))
    if indicator:
        rows = [[Fraction(int(v)) for v in rng.integers(0, 2, N)] for _ in range(R)]
    else:
        rows = [[Fraction(int(v), den) for v in rng.integers(0, den + 1, N)] for _ in range(R)]
    if uniform:
        space = make_uniform_space(N)
    else:
        raw = [int(v) for v in rng.integers(1, 6, N)]
        space = FiniteSpace(tuple(Fraction(v, sum(raw)) for v in raw))
    return FunctionTable.from_rows(rows), space


@pytest.fixture
def four_singletons():
    rows = [[Fraction(int(i == j)) for i in range(4)] for j in range(4)]
    return FunctionTable.from_rows(rows), make_uniform_space(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# ---------------------------------------------------------------------------
# one verdict line per acceptance criterion
# ---------------------------------------------------------------------------

_VERDICTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or (rep.when != "call" and not rep.failed):
        return
    number, title = mark.args
    entry = _VERDICTS.setdefault(number, {"title": title, "ok": True, "seconds": 0.0})
    entry["ok"] = entry["ok"] and not rep.failed
    entry["seconds"] += rep.duration
    if rep.when == "call":
        verdict = "PASS" if rep.passed else "FAIL"
        print(f"\n[acceptance {number}] {verdict} {item.name} ({rep.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_VERDICTS):
        e = _VERDICTS[number]
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if e['ok'] else 'FAIL'}  {e['title']} ({e['seconds']:.2f}s)"
        )
