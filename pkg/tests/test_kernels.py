import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from qtk.errors import (BasepointMismatch, EmptyFactorList, NoConvergence, NonZeroDiagonal,
                        NotSymmetric, RateMismatch, RateOutOfRange)
from qtk.graph import cycle_graph, path_graph
from qtk.kernels import (check_rate, cnd_check, default_t_grid, embedding_inner, explicit_embedding,
                         gram_identity_check, gram_power, jacobi_eigh, psd_check, schoenberg_scan,
                         tensor_inner)
from qtk.separation import build_balls, build_table

from conftest import small_graphs

sym = st.integers(1, 30).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-100, 100, allow_nan=False)))


@given(sym)
def test_jacobi_matches_numpy(a):
    a = (a + a.T) / 2
    w, v = jacobi_eigh(a)
    scale = max(1.0, float(np.abs(a).max()))
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-9 * scale * a.shape[0])
    assert np.allclose(v.T @ v, np.eye(a.shape[0]), atol=1e-10)
    assert np.abs(a @ v - v * w).max() <= 1e-9 * scale * a.shape[0]


@pytest.mark.parametrize("n", [101, 130])
def test_jacobi_large_path(n):
    rng = np.random.default_rng(n)
    a = rng.standard_normal((n, n))
    a = a + a.T
    w, _ = jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-8)


def test_jacobi_errors():
    with pytest.raises(NotSymmetric):
        jacobi_eigh(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(NotSymmetric):
        jacobi_eigh(np.zeros((2, 3)))
    with pytest.raises(NoConvergence):
        jacobi_eigh(np.array([[1.0, 2.0], [2.0, 1.0]]), max_sweeps=0)


def test_psd_check_verdicts():
    assert psd_check(np.eye(3)).psd
    rep = psd_check(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert not rep.psd and rep.verdict == "not-PSD"
    assert rep.min_eigenvalue == pytest.approx(-1.0)
    assert np.allclose(np.abs(rep.witness), [math.sqrt(0.5)] * 2)
    # tolerance is relative to the largest entry
    assert psd_check(np.diag([1e6, -1e-4])).psd
    assert not psd_check(np.diag([1.0, -1e-4])).psd


def test_cnd_examples():
    d = path_graph(3).distances
    assert cnd_check(d).psd
    assert not cnd_check(-d).psd          # minus a metric is not CND
    assert not schoenberg_scan(-d).passed
    with pytest.raises(NonZeroDiagonal):
        cnd_check(np.ones((2, 2)))
    with pytest.raises(NonZeroDiagonal):
        schoenberg_scan(np.ones((2, 2)))


def test_t_grid():
    grid = default_t_grid()
    assert len(grid) == 20 and grid[0] == 0.1 and grid[-1] == 2.0


@given(small_graphs, st.data())
def test_da_certificates(g, data):
    a = data.draw(st.integers(0, g.n - 1))
    t = build_table(g, a)
    assert cnd_check(t.da).psd
    for r in (0.1, 0.5, 0.9):
        assert psd_check(gram_power(t.da, r)).psd


@pytest.mark.parametrize("r", [0, 1, Fraction(3, 2), -Fraction(1, 2)])
def test_rate_range(r):
    with pytest.raises(RateOutOfRange):
        check_rate(r)


def _float_embedding(table, r, x, tail=400):
    """Coordinate dict built from the definition, independent of ball interning."""
    R, d = table.R, table.dist_a
    depth = int(d[x])
    c = math.sqrt(1 - r * r)
    out = {}
    for k in range(depth):
        omega = frozenset(np.flatnonzero(R[x] >= depth - k).tolist())
        out[("ball", omega)] = c * r ** k
    for m in range(tail):
        out[("tail", m)] = c * r ** (m + depth)
    return out


@given(small_graphs, st.data())
def test_embedding_inner_against_float_oracle(g, data):
    a = data.draw(st.integers(0, g.n - 1))
    x = data.draw(st.integers(0, g.n - 1))
    y = data.draw(st.integers(0, g.n - 1))
    r = data.draw(st.sampled_from([Fraction(i, 10) for i in range(1, 10)]))
    t = build_table(g, a)
    balls = build_balls(t)
    exact = embedding_inner(explicit_embedding(t, balls, r, x), explicit_embedding(t, balls, r, y))
    assert exact == r ** int(t.da[x, y])
    u, v = _float_embedding(t, float(r), x), _float_embedding(t, float(r), y)
    approx = sum(val * v[k] for k, val in u.items() if k in v)
    assert approx == pytest.approx(float(exact), rel=1e-9, abs=1e-12)


def test_c6_inner_values(c6):
    t = build_table(c6, 0)
    balls = build_balls(t)
    r = Fraction(1, 2)
    xi = [explicit_embedding(t, balls, r, x) for x in range(6)]
    assert embedding_inner(xi[1], xi[5]) == 1
    assert embedding_inner(xi[0], xi[3]) == Fraction(1, 8)
    assert embedding_inner(xi[3], xi[3]) == 1
    assert xi[3].coefficient(next(iter(xi[3].finite_part))) == (Fraction(3, 4), 1)


def test_embedding_errors(c6):
    t0, t1 = build_table(c6, 0), build_table(c6, 1)
    b0, b1 = build_balls(t0), build_balls(t1)
    u = explicit_embedding(t0, b0, Fraction(1, 3), 2)
    with pytest.raises(BasepointMismatch):
        embedding_inner(u, explicit_embedding(t1, b1, Fraction(1, 3), 2))
    with pytest.raises(RateMismatch):
        embedding_inner(u, explicit_embedding(t0, b0, Fraction(1, 4), 2))
    with pytest.raises(BasepointMismatch):
        explicit_embedding(t0, b1, Fraction(1, 3), 2)


def test_tensor_inner():
    assert tensor_inner([Fraction(1, 2), Fraction(2, 3)]) == Fraction(1, 3)
    with pytest.raises(EmptyFactorList):
        tensor_inner([])


@pytest.mark.parametrize("n", [3, 6, 9])
def test_gram_identity_cycles(n):
    g = cycle_graph(n)
    for a in range(n):
        t = build_table(g, a)
        assert gram_identity_check(t, build_balls(t), [Fraction(i, 10) for i in range(1, 10)]).passed
