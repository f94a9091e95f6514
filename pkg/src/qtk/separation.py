"""Separation radii R_a, the semimetric d_a and the lemmas built on them.

``R_a(x, y)`` is the least k such that deleting the ball ``B(a, k)``
disconnects x from y (a deleted endpoint counts as disconnected, which makes
``R_a(x, x) = d(a, x)``). ``d_a(x, y) = d(a, x) + d(a, y) - 2 R_a(x, y)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ArityMismatch, SizeCapExceeded
from .graph import (DEFAULT_CAP, Graph, ball, bottleneck_delta, connected_avoiding,
                    deletion_levels, radius_from_levels, sum_tables)
from .report import Verdict

TABLE_CAP = 2048


def separation_radius(g: Graph, a: int, x: int, y: int) -> int:
    """Single-query R_a(x, y) by direct deletion scan over k = 0, 1, 2, ..."""
    a, x, y = g.check_vertex(a), g.check_vertex(x), g.check_vertex(y)
    k = 0
    while connected_avoiding(g, x, y, ball(g, a, k)):
        k += 1
    return k


@dataclass(frozen=True)
class SeparationTable:
    """Per-basepoint kernel tables.

    ``levels[k]`` labels the components of ``X \\ B(a, k)``; full n x n tables
    are materialized lazily and only up to ``TABLE_CAP`` vertices. Pair queries
    through :meth:`r_at` work at any size.
    """

    graph: Graph
    basepoint: int
    levels: np.ndarray = field(repr=False, compare=False)

    @property
    def dist_a(self) -> np.ndarray:
        return self.graph.dist_row(self.basepoint)

    @cached_property
    def R(self) -> np.ndarray:
        if self.graph.n > TABLE_CAP:
            raise SizeCapExceeded(f"full R table for n={self.graph.n} exceeds {TABLE_CAP}")
        r = radius_from_levels(self.levels)
        r.flags.writeable = False
        return r

    @cached_property
    def da(self) -> np.ndarray:
        d = self.dist_a
        out = d[:, None] + d[None, :] - 2 * self.R
        out.flags.writeable = False
        return out

    def r_at(self, x: int, y: int) -> int:
        lx, ly = self.levels[:, x], self.levels[:, y]
        return int(np.count_nonzero((lx == ly) & (lx >= 0)))

    def da_at(self, x: int, y: int) -> int:
        d = self.dist_a
        return int(d[x] + d[y]) - 2 * self.r_at(x, y)


def build_table(g: Graph, a: int) -> SeparationTable:
    a = g.check_vertex(a)
    levels = deletion_levels(g, g.dist_row(a))
    levels.flags.writeable = False
    return SeparationTable(g, a, levels)


def semimetric_da(table: SeparationTable, x: int, y: int) -> int:
    g = table.graph
    return table.da_at(g.check_vertex(x), g.check_vertex(y))


@dataclass
class SandwichReport:
    delta: int
    delta_prime: int
    delta_x: int
    max_gap: int
    violations: list = field(default_factory=list)
    upper_tight: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"delta": self.delta, "delta_prime": self.delta_prime,
                "delta_x": self.delta_x, "max_gap": self.max_gap,
                "upper_bound_tight": self.upper_tight,
                "violations": self.violations[:20], "passed": self.passed}


def all_tables(g: Graph) -> list[SeparationTable]:
    return [build_table(g, a) for a in range(g.n)]


def delta_x(g: Graph, tables: Sequence[SeparationTable] | None = None) -> int:
    """Least constant with d - Delta_X <= d_a <= d over all a, x, y."""
    tables = all_tables(g) if tables is None else tables
    return max(int((g.distances - t.da).max()) for t in tables)


def sandwich_check(g: Graph, cap: int = DEFAULT_CAP,
                   tables: Sequence[SeparationTable] | None = None) -> SandwichReport:
    delta = bottleneck_delta(g, cap=cap)
    dprime = 6 * delta + 2
    tables = all_tables(g) if tables is None else tables
    d = g.distances
    violations = []
    max_gap = 0
    tight = True
    for t in tables:
        gap = d - t.da
        max_gap = max(max_gap, int(gap.max()))
        tight &= bool((gap == 0).all())
        for kind, bad in (("upper", gap < 0), ("lower", gap > dprime)):
            for x, y in np.argwhere(bad):
                violations.append({"kind": kind, "a": t.basepoint, "x": int(x), "y": int(y),
                                   "d": int(d[x, y]), "d_a": int(t.da[x, y])})
    return SandwichReport(delta, dprime, max_gap, max_gap, violations, tight)


def ultrametric_check(table: SeparationTable) -> Verdict:
    """R_a(x, y) >= min(R_a(x, z), R_a(z, y)) over all triples."""
    R = table.R
    lower = np.minimum(R[:, :, None], R[None, :, :])  # [x, z, y]
    bad = R[:, None, :] < lower
    n = R.shape[0]
    v = Verdict("ultrametric", not bad.any(), checked=n ** 3)
    if bad.any():
        x, z, y = (int(i) for i in np.argwhere(bad)[0])
        v.witness = {"a": table.basepoint, "x": x, "y": y, "z": z}
    return v


def range_lemma_check(table: SeparationTable) -> Verdict:
    """{R_a(x, y) : y} == {0, ..., d(a, x)} for every x."""
    R, d = table.R, table.dist_a
    for x in range(R.shape[0]):
        got = set(int(r) for r in R[x])
        want = set(range(int(d[x]) + 1))
        if got != want:
            return Verdict("range_lemma", False, checked=x + 1,
                           witness={"a": table.basepoint, "x": x,
                                    "missing": sorted(want - got), "extra": sorted(got - want)})
    return Verdict("range_lemma", True, checked=R.shape[0])


@dataclass(frozen=True)
class BallFamily:
    """Interned balls V_a(x, k) = {y : R_a(x, y) >= k} for k = 0..d(a, x).

    Equal sets share one integer key, so comparing keys is comparing sets.
    """

    table: SeparationTable
    keys: dict = field(repr=False)            # (x, k) -> key
    members: tuple = field(repr=False)        # key -> frozenset

    @property
    def basepoint(self) -> int:
        return self.table.basepoint

    def ball(self, x: int, k: int) -> frozenset[int]:
        return self.members[self.keys[x, k]]

    def omega_key(self, x: int, k: int) -> int:
        """Key of Omega(x, k) = V_a(x, d(a, x) - k)."""
        return self.keys[x, int(self.table.dist_a[x]) - k]


def build_balls(table: SeparationTable) -> BallFamily:
    R, d = table.R, table.dist_a
    intern: dict[frozenset, int] = {}
    keys = {}
    for x in range(R.shape[0]):
        for k in range(int(d[x]) + 1):
            s = frozenset(int(y) for y in np.flatnonzero(R[x] >= k))
            keys[x, k] = intern.setdefault(s, len(intern))
    members = tuple(sorted(intern, key=intern.__getitem__))
    return BallFamily(table, keys, members)


def ball_equality_check(balls: BallFamily) -> Verdict:
    """V_a(x, k) = V_a(y, j)  <=>  k = j and R_a(x, y) >= k, all admissible quadruples."""
    items = sorted(balls.keys.items())
    xs = np.array([x for (x, _), _ in items])
    ks = np.array([k for (_, k), _ in items])
    ids = np.array([key for _, key in items])
    same_set = ids[:, None] == ids[None, :]
    R = balls.table.R
    predicate = (ks[:, None] == ks[None, :]) & (R[xs[:, None], xs[None, :]] >= ks[:, None])
    bad = same_set != predicate
    v = Verdict("ball_equality", not bad.any(), checked=len(items) ** 2)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        v.witness = {"a": balls.basepoint, "x": int(xs[i]), "k": int(ks[i]),
                     "y": int(xs[j]), "j": int(ks[j]), "sets_equal": bool(same_set[i, j])}
    return v


def nesting_check(balls: BallFamily) -> Verdict:
    """V_a(x, k+1) within V_a(x, k); every member y of V_a(x, k) is a centre of it."""
    d = balls.table.dist_a
    checked = 0
    for (x, k), key in balls.keys.items():
        s = balls.members[key]
        if k + 1 <= d[x] and not balls.ball(x, k + 1) <= s:
            return Verdict("ball_nesting", False, checked, {"x": x, "k": k})
        for y in s:
            checked += 1
            if k <= d[y] and balls.keys[y, k] != key:
                return Verdict("ball_nesting", False, checked, {"x": x, "k": k, "y": y})
    return Verdict("ball_nesting", True, checked)


@dataclass(frozen=True)
class ProductSeparation:
    tables: tuple[SeparationTable, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(t.graph.n for t in self.tables)

    @cached_property
    def da(self) -> np.ndarray:
        """Product d_a over flattened (C-order) product points."""
        return sum_tables([t.da for t in self.tables])


def product_separation(factors: Sequence[Graph], basepoints: Sequence[int]) -> ProductSeparation:
    if len(factors) != len(basepoints):
        raise ArityMismatch("one basepoint per factor")
    return ProductSeparation(tuple(build_table(g, a) for g, a in zip(factors, basepoints)))


def product_da(p: ProductSeparation, x: Sequence[int], y: Sequence[int]) -> int:
    if len(x) != len(p.tables) or len(y) != len(p.tables):
        raise ArityMismatch(f"expected {len(p.tables)}-tuples, got {len(x)} and {len(y)}")
    return sum(semimetric_da(t, u, v) for t, u, v in zip(p.tables, x, y))


def product_delta_x(factors: Sequence[Graph]) -> int:
    return sum(delta_x(g) for g in factors)
