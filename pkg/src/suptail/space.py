"""Finite probability spaces, function classes as exact value tables, and
the atom partitions that every exact computation downstream relies on.

Product measures are never materialized; they only exist through the tail
operations that consume a space and a sample size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from . import _config
from .rational import RationalLike, as_fraction, common_denominator, format_fraction

_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class FiniteSpace:
    """A finite point set {0, ..., point_count-1} with exact rational weights."""

    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.weights) == 0:
            raise ValueError("a space needs at least one point")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if sum(self.weights, Fraction(0)) != 1:
            raise ValueError("weights must sum to exactly 1")

    @classmethod
    def from_weights(cls, weights: Iterable[RationalLike]) -> "FiniteSpace":
        return cls(tuple(as_fraction(w) for w in weights))

    @property
    def point_count(self) -> int:
        return len(self.weights)

    @cached_property
    def is_uniform(self) -> bool:
        return all(w == self.weights[0] for w in self.weights)

    @cached_property
    def weight_denominator(self) -> int:
        return common_denominator(self.weights)

    @cached_property
    def integer_weights(self) -> tuple[int, ...]:
        """Weights times their common denominator."""
        d = self.weight_denominator
        return tuple(int(w * d) for w in self.weights)

    def measure(self, points: Iterable[int]) -> Fraction:
        return sum((self.weights[i] for i in points), Fraction(0))


@dataclass(frozen=True)
class FunctionTable:
    """A class of functions on a finite space: one row of [0, 1] values per function."""

    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.values) == 0:
            raise ValueError("a function class needs at least one row")
        width = len(self.values[0])
        if width == 0:
            raise ValueError("rows must be nonempty")
        for row in self.values:
            if len(row) != width:
                raise ValueError("ragged function table")
            for v in row:
                if v < 0 or v > 1:
                    raise ValueError(f"value {v} outside [0, 1]")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[RationalLike]]) -> "FunctionTable":
        return cls(tuple(tuple(as_fraction(v) for v in row) for row in rows))

    @property
    def class_size(self) -> int:
        return len(self.values)

    @property
    def point_count(self) -> int:
        return len(self.values[0])

    def column(self, x: int) -> tuple[Fraction, ...]:
        return tuple(row[x] for row in self.values)

    @cached_property
    def value_denominator(self) -> int:
        return common_denominator(v for row in self.values for v in row)

    @cached_property
    def is_indicator(self) -> bool:
        return all(v in (0, 1) for row in self.values for v in row)

    def scaled(self, extra_factor: int = 1, headroom: int = 1) -> np.ndarray:
        """Values times ``value_denominator * extra_factor`` as an integer array.

        Returns int64 when ``headroom`` copies of the largest entry still fit,
        otherwise an object array of Python ints (numpy path only).
        """
        d = self.value_denominator * extra_factor
        ints = [[int(v * d) for v in row] for row in self.values]
        if d * headroom < _INT64_SAFE:
            return np.array(ints, dtype=np.int64)
        return np.array(ints, dtype=object)

    def restrict(self, points: Sequence[int]) -> "FunctionTable":
        return FunctionTable(tuple(tuple(row[i] for i in points) for row in self.values))

    def check_space(self, space: FiniteSpace) -> None:
        if space.point_count != self.point_count:
            raise ValueError(
                f"class has {self.point_count} columns but space has {space.point_count} points"
            )


@dataclass(frozen=True)
class PartitionAlgebra:
    """Disjoint point-index atoms covering the space, with their exact measures."""

    atoms: tuple[tuple[int, ...], ...]
    atom_measures: tuple[Fraction, ...]
    signatures: tuple[tuple, ...] = ()

    def __post_init__(self):
        if len(self.atoms) != len(self.atom_measures):
            raise ValueError("one measure per atom required")
        seen: set[int] = set()
        for atom in self.atoms:
            if not atom:
                raise ValueError("empty atom")
            if seen.intersection(atom):
                raise ValueError("atoms overlap")
            seen.update(atom)
        if seen != set(range(len(seen))):
            raise ValueError("atoms must cover 0..N-1")

    @property
    def atom_count(self) -> int:
        return len(self.atoms)


def make_uniform_space(point_count: int) -> FiniteSpace:
    if point_count < 1:
        raise ValueError("point_count must be at least 1")
    w = Fraction(1, point_count)
    return FiniteSpace((w,) * point_count)


def sup_mean(table: FunctionTable, space: FiniteSpace) -> Fraction:
    """max over rows of the integral of the row against the space's weights."""
    table.check_space(space)
    return max(
        sum((w * v for w, v in zip(space.weights, row)), Fraction(0)) for row in table.values
    )


def _group_points(keys: Sequence, space: FiniteSpace) -> PartitionAlgebra:
    order: dict = {}
    for x, key in enumerate(keys):
        order.setdefault(key, []).append(x)
    atoms = tuple(tuple(pts) for pts in order.values())
    return PartitionAlgebra(
        atoms=atoms,
        atom_measures=tuple(space.measure(a) for a in atoms),
        signatures=tuple(order.keys()),
    )


def atoms_of_level_sets(
    table: FunctionTable, threshold: RationalLike, space: FiniteSpace | None = None
) -> PartitionAlgebra:
    """Atoms of the algebra generated by the sets {x : f(x) >= threshold}.

    Each atom is a maximal group of points sharing the same membership
    pattern across all rows.  Atom measures use ``space`` (uniform if omitted).
    """
    if space is None:
        space = make_uniform_space(table.point_count)
    table.check_space(space)
    t = as_fraction(threshold)
    keys = [tuple(row[x] >= t for row in table.values) for x in range(table.point_count)]
    return _group_points(keys, space)


def value_atoms(table: FunctionTable, space: FiniteSpace) -> PartitionAlgebra:
    """Constancy cells of the whole class: points with identical value columns."""
    table.check_space(space)
    keys = [table.column(x) for x in range(table.point_count)]
    return _group_points(keys, space)


# ---------------------------------------------------------------------------
# classes of indicators of small subsets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SubsetClassHandle:
    """Implicit class of indicators of all nonempty subsets with at most L of N points."""

    point_count: int
    max_size: int

    @property
    def cardinality(self) -> int:
        return sum(math.comb(self.point_count, i) for i in range(1, self.max_size + 1))

    @property
    def rho(self) -> Fraction:
        """Largest integral under the uniform distribution, L/N."""
        return Fraction(self.max_size, self.point_count)

    def all_draws_covered(self, n: int) -> Fraction:
        """Exact P(sup_f S_n(f) >= n): at most L distinct values among n draws."""
        from .rational import stirling2

        if n == 0:
            return Fraction(1)
        N, L = self.point_count, self.max_size
        favourable = sum(
            math.comb(N, i) * math.factorial(i) * stirling2(n, i)
            for i in range(1, min(L, n) + 1)
        )
        return Fraction(favourable, N**n)


def subset_indicator_class(
    point_count: int, max_size: int, mode: str = "explicit", cap: int | None = None
) -> FunctionTable | SubsetClassHandle:
    """Indicators of all subsets of {0..N-1} with 1..L points.

    ``mode="explicit"`` enumerates rows (size-major, then lexicographic);
    ``mode="implicit"`` returns a :class:`SubsetClassHandle`.
    """
    N, L = point_count, max_size
    if not 1 <= L <= N:
        raise ValueError(f"need 1 <= L <= N, got L={L}, N={N}")
    handle = SubsetClassHandle(N, L)
    if mode == "implicit":
        return handle
    if mode != "explicit":
        raise ValueError(f"unknown mode {mode!r}")
    cap = _config.subset_class_cap() if cap is None else cap
    if handle.cardinality > cap:
        raise ValueError(
            f"explicit enumeration needs {handle.cardinality} rows, above the cap of {cap}"
            " (raise SUPTAIL_SUBSET_CLASS_CAP or use mode='implicit')"
        )
    one, zero = Fraction(1), Fraction(0)
    rows = []
    for size in range(1, L + 1):
        for subset in combinations(range(N), size):
            members = set(subset)
            rows.append(tuple(one if x in members else zero for x in range(N)))
    return FunctionTable(tuple(rows))


def subset_system(point_count: int, max_size: int, include_empty: bool = True) -> list[frozenset]:
    """All subsets with at most ``max_size`` points, as a set system."""
    start = 0 if include_empty else 1
    return [
        frozenset(c)
        for size in range(start, max_size + 1)
        for c in combinations(range(point_count), size)
    ]


# ---------------------------------------------------------------------------
# line-oriented text format
# ---------------------------------------------------------------------------

def dumps(space: FiniteSpace | None = None, table: FunctionTable | None = None) -> str:
    """Serialize to the ``space N`` / ``class R N`` text format."""
    lines = []
    if space is not None:
        lines.append(f"space {space.point_count}")
        lines.append(" ".join(format_fraction(w) for w in space.weights))
    if table is not None:
        lines.append(f"class {table.class_size} {table.point_count}")
        for row in table.values:
            lines.append(" ".join(format_fraction(v) for v in row))
    return "\n".join(lines) + "\n"


def loads(text: str) -> tuple[FiniteSpace | None, FunctionTable | None]:
    """Parse the text format; blank lines and ``#`` comments are ignored."""
    tokens: list[tuple[int, str]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        tokens.extend((lineno, tok) for tok in line.split())
    pos = 0
    space = table = None

    def take(count: int, what: str) -> list[Fraction]:
        nonlocal pos
        if pos + count > len(tokens):
            raise ValueError(f"unexpected end of input while reading {what}")
        out = []
        for lineno, tok in tokens[pos:pos + count]:
            try:
                out.append(Fraction(tok))
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"line {lineno}: bad rational {tok!r}") from exc
        pos += count
        return out

    def header_int(what: str) -> int:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"missing {what}")
        lineno, tok = tokens[pos]
        pos += 1
        try:
            return int(tok)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: expected integer {what}, got {tok!r}") from exc

    while pos < len(tokens):
        lineno, word = tokens[pos]
        pos += 1
        if word == "space":
            if space is not None:
                raise ValueError(f"line {lineno}: duplicate space block")
            n = header_int("point count")
            space = FiniteSpace(tuple(take(n, "weights")))
        elif word == "class":
            if table is not None:
                raise ValueError(f"line {lineno}: duplicate class block")
            r = header_int("row count")
            n = header_int("column count")
            flat = take(r * n, "class rows")
            table = FunctionTable(tuple(tuple(flat[i * n:(i + 1) * n]) for i in range(r)))
        else:
            raise ValueError(f"line {lineno}: expected 'space' or 'class', got {word!r}")
    if space is not None and table is not None:
        table.check_space(space)
    return space, table
