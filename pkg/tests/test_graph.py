import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qtk.errors import InvalidSpec, InvalidVertex, SizeCapExceeded
from qtk.graph import (Graph, ProductSpace, add_chords, ball, bottleneck_delta, component_labels,
                       connected_avoiding, cycle_graph, deletion_levels, generate, geodesics,
                       load_graph, path_graph, random_quasi_tree, random_tree, save_graph,
                       star_graph, sum_tables)

from conftest import oracle_bottleneck, small_graphs, to_nx


@pytest.mark.parametrize("n, edges", [
    (0, []),
    (3, [(0, 1)]),                 # disconnected
    (2, [(0, 0), (0, 1)]),         # self-loop
    (2, [(0, 1), (1, 0)]),         # duplicate
    (2, [(0, 2)]),                 # out of range
])
def test_graph_rejects_bad_input(n, edges):
    with pytest.raises(InvalidSpec):
        Graph(n, tuple(edges))


@pytest.mark.parametrize("v", [-1, 6, 2.0, True, "1"])
def test_check_vertex(c6, v):
    with pytest.raises(InvalidVertex):
        c6.check_vertex(v)


@given(small_graphs)
def test_distances_match_networkx(g):
    ref = dict(nx.all_pairs_shortest_path_length(to_nx(g)))
    want = np.array([[ref[x][y] for y in range(g.n)] for x in range(g.n)])
    assert (g.distances == want).all()


@given(small_graphs, st.data())
def test_connected_avoiding_matches_networkx(g, data):
    x = data.draw(st.integers(0, g.n - 1))
    y = data.draw(st.integers(0, g.n - 1))
    removed = set(data.draw(st.lists(st.integers(0, g.n - 1), max_size=g.n)))
    h = to_nx(g)
    sub = h.subgraph(set(h) - removed)
    want = x not in removed and y not in removed and nx.has_path(sub, x, y)
    assert connected_avoiding(g, x, y, removed) == want


@given(small_graphs, st.data())
def test_component_labels_partition(g, data):
    removed = np.array(data.draw(st.lists(st.booleans(), min_size=g.n, max_size=g.n)))
    lab = component_labels(g, removed)
    assert (lab[removed] == -1).all()
    for x in range(g.n):
        for y in range(g.n):
            if removed[x] or removed[y]:
                continue
            assert (lab[x] == lab[y]) == connected_avoiding(g, x, y, set(np.flatnonzero(removed)))


def test_deletion_levels_shape(c6):
    lv = deletion_levels(c6, c6.dist_row(0))
    assert lv.shape[1] == 6
    assert (lv[0][[0]] == -1).all()


@pytest.mark.parametrize("g, delta", [
    (path_graph(7), 0), (star_graph(6), 0), (cycle_graph(4), 1), (cycle_graph(6), 1),
    (cycle_graph(9), 2),
])
def test_bottleneck_known(g, delta):
    assert bottleneck_delta(g) == delta


@given(small_graphs)
def test_bottleneck_matches_oracle(g):
    assert bottleneck_delta(g) == oracle_bottleneck(to_nx(g))


def test_bottleneck_cap():
    with pytest.raises(SizeCapExceeded):
        bottleneck_delta(path_graph(10), cap=5)


@given(small_graphs, st.data())
def test_geodesics_match_networkx(g, data):
    x = data.draw(st.integers(0, g.n - 1))
    y = data.draw(st.integers(0, g.n - 1))
    want = sorted(tuple(p) for p in nx.all_shortest_paths(to_nx(g), x, y))
    assert sorted(geodesics(g, x, y)) == want


def test_ball(c6):
    assert ball(c6, 0, 0) == {0}
    assert ball(c6, 0, 1) == {5, 0, 1}
    assert ball(c6, 0, 3) == set(range(6))


@given(st.integers(1, 40), st.integers(0, 99))
def test_random_tree_is_tree(n, seed):
    g = random_tree(n, seed)
    assert len(g.edges) == n - 1
    assert random_tree(n, seed) == g


@given(st.integers(4, 30), st.integers(2, 5), st.integers(1, 5), st.integers(0, 99))
def test_random_quasi_tree_deterministic(n, c, count, seed):
    g = random_quasi_tree(n, c, count, seed)
    assert g == random_quasi_tree(n, c, count, seed)
    assert len(g.edges) >= n - 1


def test_add_chords():
    g = add_chords(path_graph(4), [(0, 3)])
    assert g == cycle_graph(4)


@pytest.mark.parametrize("spec, n", [
    ({"family": "path", "n": 5}, 5), ({"family": "cycle", "n": 7}, 7), ({"family": "star", "n": 4}, 4),
    ({"family": "tree", "n": 9, "seed": 3}, 9),
    ({"family": "quasi_tree", "n": 12, "c": 3, "count": 2, "seed": 1}, 12),
    ({"family": "quasi_tree", "tree": {"family": "path", "n": 4}, "chords": [[0, 3]]}, 4),
])
def test_generate(spec, n):
    assert generate(spec).n == n


@pytest.mark.parametrize("spec", [{"family": "blob"}, {"family": "path"}, {}])
def test_generate_errors(spec):
    with pytest.raises(InvalidSpec):
        generate(spec)


def test_json_round_trip(tmp_path, c6):
    p = tmp_path / "g.json"
    save_graph(c6, p)
    assert load_graph(p) == c6
    assert json.loads(p.read_text())["n"] == 6


@pytest.mark.parametrize("data", [{"n": 2}, {"n": 2, "edges": [[0, 1, 2]]}, {"edges": []}])
def test_from_json_errors(data):
    with pytest.raises(InvalidSpec):
        Graph.from_json(data)


def test_product_space():
    sp = ProductSpace((cycle_graph(4), path_graph(3)), (1, 2))
    assert sp.n_points == 12
    assert sp.basepoint == sp.flatten((1, 2))
    for i in range(12):
        assert sp.flatten(sp.unflatten(i)) == i
    for i in range(12):
        for j in range(12):
            assert sp.distances[i, j] == sp.distance(sp.unflatten(i), sp.unflatten(j))


def test_product_space_errors():
    with pytest.raises(InvalidSpec):
        ProductSpace((), ())
    with pytest.raises(InvalidSpec):
        ProductSpace((path_graph(2),), (0, 0))


def test_sum_tables():
    a = np.arange(4).reshape(2, 2)
    b = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    s = sum_tables([a, b])
    assert s.shape == (6, 6)
    assert s[np.ravel_multi_index((1, 2), (2, 3)), np.ravel_multi_index((0, 0), (2, 3))] == a[1, 0] + b[2, 0]
