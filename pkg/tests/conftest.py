import networkx as nx
import pytest
from hypothesis import settings, strategies as st

from qtk.graph import Graph, cycle_graph, random_quasi_tree, random_tree

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def ball_nx(h: nx.Graph, a: int, k: int) -> set:
    return {v for v, d in nx.single_source_shortest_path_length(h, a).items() if d <= k}


def oracle_R(h: nx.Graph, a: int, x: int, y: int) -> int:
    """Least k with x, y disconnected once B(a, k) is removed (networkx only)."""
    k = 0
    while True:
        gone = ball_nx(h, a, k)
        if x in gone or y in gone:
            return k
        sub = h.subgraph(set(h) - gone)
        if not nx.has_path(sub, x, y):
            return k
        k += 1


def oracle_bottleneck(h: nx.Graph) -> int:
    d = dict(nx.all_pairs_shortest_path_length(h))
    best = 0
    for x in h:
        for y in h:
            for p in h:
                if d[x][p] + d[p][y] == d[x][y]:
                    best = max(best, oracle_R(h, p, x, y))
    return best


trees = st.builds(random_tree, st.integers(1, 14), st.integers(0, 10_000))
quasi_trees = st.builds(random_quasi_tree, st.integers(4, 14), st.integers(2, 4), st.integers(1, 4),
                        st.integers(0, 10_000))
small_graphs = st.one_of(trees, quasi_trees, st.builds(cycle_graph, st.integers(3, 12)))


@pytest.fixture
def c6():
    return cycle_graph(6)
