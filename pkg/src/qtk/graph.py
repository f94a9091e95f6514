"""Finite graphs with the edge-path metric.

Vertices are ``0..n-1``. Everything here is exact integer arithmetic; the
only floating point in the package lives in the eigensolver.
"""
from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidSpec, InvalidVertex, SizeCapExceeded

DEFAULT_CAP = 64


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    labels: Mapping[int, str] | None = field(default=None, hash=False)
    _rows: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidSpec("graph needs at least one vertex")
        norm = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidSpec(f"edge ({u},{v}) has a vertex outside 0..{self.n - 1}")
            if u == v:
                raise InvalidSpec(f"self-loop at {u}")
            norm.append((min(u, v), max(u, v)))
        if len(set(norm)) != len(norm):
            raise InvalidSpec("duplicate edge")
        object.__setattr__(self, "edges", tuple(sorted(norm)))
        if len(self._component_of(0)) != self.n:
            raise InvalidSpec("graph is not connected")

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_set

    def check_vertex(self, v) -> int:
        if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
            raise InvalidVertex(f"vertex {v!r} is not an integer")
        if not 0 <= v < self.n:
            raise InvalidVertex(f"vertex {v} outside 0..{self.n - 1}")
        return int(v)

    def _component_of(self, s: int) -> set[int]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {s}
        todo = [s]
        while todo:
            u = todo.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return seen

    def dist_row(self, source: int) -> np.ndarray:
        """Hop distances from ``source`` (cached, read-only)."""
        row = self._rows.get(source)
        if row is None:
            row = _bfs(self.adjacency, source, self.n)
            row.flags.writeable = False
            self._rows[source] = row
        return row

    @cached_property
    def distances(self) -> np.ndarray:
        d = np.stack([self.dist_row(s) for s in range(self.n)])
        d.flags.writeable = False
        return d

    @cached_property
    def diameter(self) -> int:
        return int(self.distances.max())

    def to_json(self) -> dict:
        out = {"n": self.n, "edges": [list(e) for e in self.edges]}
        if self.labels:
            out["labels"] = {str(k): v for k, v in sorted(self.labels.items())}
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Graph":
        try:
            n = int(data["n"])
            edges = [tuple(e) for e in data["edges"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed graph JSON: {exc}") from exc
        if any(len(e) != 2 for e in edges):
            raise InvalidSpec("every edge must be a pair")
        labels = data.get("labels")
        if labels is not None:
            labels = {int(k): str(v) for k, v in labels.items()}
        return cls(n, tuple(edges), labels)


def _bfs(adj, source: int, n: int) -> np.ndarray:
    dist = np.full(n, -1, dtype=np.int64)
    dist[source] = 0
    q = deque([source])
    while q:
        u = q.popleft()
        du = dist[u] + 1
        for w in adj[u]:
            if dist[w] < 0:
                dist[w] = du
                q.append(w)
    return dist


def load_graph(path) -> Graph:
    with open(path) as fh:
        return Graph.from_json(json.load(fh))


def save_graph(g: Graph, path) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_json(), fh, indent=1)


@dataclass(frozen=True)
class DistanceOracle:
    source: int
    distances: tuple[int, ...]

    def __getitem__(self, v: int) -> int:
        return self.distances[v]


def bfs_distances(g: Graph, source: int) -> DistanceOracle:
    source = g.check_vertex(source)
    return DistanceOracle(source, tuple(int(x) for x in g.dist_row(source)))


def ball(g: Graph, a: int, k: int) -> frozenset[int]:
    a = g.check_vertex(a)
    if k < 0:
        raise InvalidSpec("radius must be non-negative")
    row = g.dist_row(a)
    return frozenset(int(v) for v in np.flatnonzero(row <= k))


def connected_avoiding(g: Graph, x: int, y: int, removed: Iterable[int]) -> bool:
    """True iff x and y are joined by a path in the graph minus ``removed``.

    Returns False whenever x or y itself is removed.
    """
    x, y = g.check_vertex(x), g.check_vertex(y)
    removed = set(removed)
    if x in removed or y in removed:
        return False
    if x == y:
        return True
    seen = {x} | removed
    q = deque([x])
    while q:
        u = q.popleft()
        for w in g.adjacency[u]:
            if w == y:
                return True
            if w not in seen:
                seen.add(w)
                q.append(w)
    return False


def component_labels(g: Graph, removed: np.ndarray) -> np.ndarray:
    """Connected-component ids of the induced subgraph on ``~removed``.

    Removed vertices get label -1. Batched form of :func:`connected_avoiding`:
    x, y are connected avoiding the mask iff their labels agree and are >= 0.
    """
    removed = np.asarray(removed, dtype=bool).tolist()
    labels = [-1] * g.n
    adj = g.adjacency
    nxt = 0
    for s in range(g.n):
        if removed[s] or labels[s] >= 0:
            continue
        labels[s] = nxt
        stack = [s]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not removed[w] and labels[w] < 0:
                    labels[w] = nxt
                    stack.append(w)
        nxt += 1
    return np.array(labels, dtype=np.int64)


def deletion_levels(g: Graph, dist_from_center: np.ndarray, kmax: int | None = None) -> np.ndarray:
    """Stack of :func:`component_labels` for ``X \\ B(c, k)``, k = 0..kmax."""
    if kmax is None:
        kmax = int(dist_from_center.max())
    return np.stack([component_labels(g, dist_from_center <= k) for k in range(kmax + 1)])


def radius_from_levels(levels: np.ndarray) -> np.ndarray:
    """All-pairs least k that separates, from the per-level labels.

    Separation is monotone in k, so the least separating k equals the number
    of levels on which the pair is still connected.
    """
    n = levels.shape[1]
    out = np.zeros((n, n), dtype=np.int64)
    for lab in levels:
        out += (lab[:, None] == lab[None, :]) & (lab[:, None] >= 0)
    return out


def on_geodesic_mask(g: Graph, p: int) -> np.ndarray:
    """mask[x, y] is True iff p lies on some geodesic between x and y."""
    d = g.distances
    return d[:, p][:, None] + d[p, :][None, :] == d


def bottleneck_delta(g: Graph, cap: int = DEFAULT_CAP) -> int:
    """Least Delta such that every x-y path meets B(p, Delta) for p on a geodesic.

    For each p, the least k for which B(p, k) separates x from y is read off the
    deletion levels around p; the maximum over geodesic triples is returned.
    """
    if g.n > cap:
        raise SizeCapExceeded(f"bottleneck_delta: n={g.n} exceeds cap {cap}")
    best = 0
    for p in range(g.n):
        sep = radius_from_levels(deletion_levels(g, g.dist_row(p)))
        mask = on_geodesic_mask(g, p)
        best = max(best, int(sep[mask].max()))
    return best


def geodesics(g: Graph, x: int, y: int, cap: int = DEFAULT_CAP) -> list[tuple[int, ...]]:
    """All geodesic vertex sequences from x to y, walked through the BFS DAG."""
    if g.n > cap:
        raise SizeCapExceeded(f"geodesics: n={g.n} exceeds cap {cap}")
    x, y = g.check_vertex(x), g.check_vertex(y)
    dy = g.dist_row(y)
    out: list[tuple[int, ...]] = []

    def walk(path):
        u = path[-1]
        if u == y:
            out.append(tuple(path))
            return
        for w in g.adjacency[u]:
            if dy[w] == dy[u] - 1:
                walk(path + [w])

    walk([x])
    return out


# -- generators -------------------------------------------------------------

def path_graph(n: int) -> Graph:
    if n < 1:
        raise InvalidSpec("path needs n >= 1")
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidSpec("cycle needs n >= 3")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def star_graph(n: int) -> Graph:
    if n < 1:
        raise InvalidSpec("star needs n >= 1")
    return Graph(n, tuple((0, i) for i in range(1, n)))


def random_tree(n: int, seed: int) -> Graph:
    """Random recursive tree: vertex i attaches to a uniform earlier vertex."""
    if n < 1:
        raise InvalidSpec("tree needs n >= 1")
    rng = np.random.default_rng(seed)
    return Graph(n, tuple((int(rng.integers(0, i)), i) for i in range(1, n)))


def add_chords(tree: Graph, chords: Iterable[Sequence[int]]) -> Graph:
    edges = set(tree.edges)
    for u, v in chords:
        e = (min(u, v), max(u, v))
        if e in edges:
            raise InvalidSpec(f"chord {e} duplicates an edge")
        edges.add(e)
    return Graph(tree.n, tuple(edges), tree.labels)


def random_quasi_tree(n: int, c: int, count: int, seed: int) -> Graph:
    """Random tree plus up to ``count`` chords between vertices at tree distance 2..c.

    Chords of bounded tree length keep the result (1, c)-quasi-isometric to the tree.
    """
    if n < 1 or c < 2 or count < 0:
        raise InvalidSpec("quasi-tree needs n >= 1, c >= 2, count >= 0")
    tree = random_tree(n, seed)
    d = tree.distances
    cand = [(u, v) for u, v in itertools.combinations(range(n), 2) if 2 <= d[u, v] <= c]
    rng = np.random.default_rng([seed, 1])
    if not cand:
        return tree
    pick = rng.choice(len(cand), size=min(count, len(cand)), replace=False)
    return add_chords(tree, [cand[i] for i in sorted(pick)])


def generate(spec: Mapping) -> Graph:
    """Build a graph from a family description, e.g. ``{"family": "cycle", "n": 6}``."""
    fam = spec.get("family")
    try:
        if fam == "path":
            return path_graph(int(spec["n"]))
        if fam == "cycle":
            return cycle_graph(int(spec["n"]))
        if fam == "star":
            return star_graph(int(spec["n"]))
        if fam == "tree":
            return random_tree(int(spec["n"]), int(spec.get("seed", 0)))
        if fam == "quasi_tree":
            if "tree" in spec:
                base = spec["tree"]
                base = base if isinstance(base, Graph) else generate(base)
                return add_chords(base, spec.get("chords", ()))
            return random_quasi_tree(int(spec["n"]), int(spec.get("c", 3)),
                                     int(spec.get("count", 2)), int(spec.get("seed", 0)))
    except KeyError as exc:
        raise InvalidSpec(f"missing field {exc} for family {fam!r}") from exc
    raise InvalidSpec(f"unknown graph family {fam!r}")


# -- products ---------------------------------------------------------------

@dataclass(frozen=True)
class ProductSpace:
    """X_1 x ... x X_N with the l1 metric; points are flattened C-order indices."""

    factors: tuple[Graph, ...]
    basepoints: tuple[int, ...]

    def __post_init__(self):
        if not self.factors:
            raise InvalidSpec("product needs at least one factor")
        if len(self.basepoints) != len(self.factors):
            raise InvalidSpec("one basepoint per factor")
        for g, a in zip(self.factors, self.basepoints):
            g.check_vertex(a)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(g.n for g in self.factors)

    @property
    def n_points(self) -> int:
        return int(np.prod(self.shape))

    def flatten(self, x: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(x), self.shape))

    def unflatten(self, i: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.unravel_index(i, self.shape))

    @property
    def basepoint(self) -> int:
        return self.flatten(self.basepoints)

    def distance(self, x: Sequence[int], y: Sequence[int]) -> int:
        return sum(int(g.distances[u, v]) for g, u, v in zip(self.factors, x, y))

    @cached_property
    def distances(self) -> np.ndarray:
        return sum_tables([g.distances for g in self.factors])


def sum_tables(tables: Sequence[np.ndarray]) -> np.ndarray:
    """l1-sum of per-factor pair tables, indexed by flattened product points."""
    total = np.zeros((1, 1), dtype=np.int64)
    for t in tables:
        m = t.shape[0]
        k = total.shape[0]
        total = (total[:, None, :, None] + t[None, :, None, :]).reshape(k * m, k * m)
    return total
