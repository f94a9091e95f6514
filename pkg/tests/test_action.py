import itertools
import math

import pytest
from hypothesis import given, strategies as st

from qtk.action import (FreeGroupLaw, GroupElement, IntegerLaw, PermutationAction, RegularAction,
                        action_form, apply_rep, automorphism_action, cayley_region, coarse_envelopes,
                        cocycle, cocycle_identity_check, cocycle_norm_check, cycle_rotation,
                        expected_cocycle_norm, free_group_action, graph_automorphisms, inverse_name,
                        properness_report, rep_bound_report)
from qtk.errors import ExplorationExceeded, InvalidSpec, SizeCapExceeded
from qtk.gns import MeanZeroVector
from qtk.graph import ProductSpace, cycle_graph, path_graph, random_quasi_tree, star_graph
from qtk.separation import delta_x


@pytest.mark.parametrize("name, inv", [("a", "A"), ("B", "b"), ("g1", "g1^-1"), ("g1^-1", "g1")])
def test_inverse_name(name, inv):
    assert inverse_name(name) == inv


words = st.lists(st.sampled_from("aAbB"), max_size=8).map(tuple)


@given(words, words, words)
def test_free_group_law(u, v, w):
    law = FreeGroupLaw(2)
    ru, rv, rw = (law.multiply((), x) for x in (u, v, w))
    assert law.multiply(law.multiply(ru, rv), rw) == law.multiply(ru, law.multiply(rv, rw))
    assert law.multiply(ru, law.inverse(ru)) == ()
    assert all(a != b.swapcase() for a, b in zip(ru, ru[1:]))


def test_free_group_rank_bounds():
    with pytest.raises(InvalidSpec):
        FreeGroupLaw(0)


@pytest.mark.parametrize("radius, size", [(1, 5), (2, 17), (3, 53)])
def test_cayley_region_size(radius, size):
    # 1 + 4 * (3^radius - 1) / 2 reduced words in F_2
    g, index = cayley_region(FreeGroupLaw(2), radius)
    assert g.n == len(index) == size
    assert len(g.edges) == size - 1


def test_integer_region():
    g, index = cayley_region(IntegerLaw(), 3)
    assert sorted(index) == list(range(-3, 4))


def _brute_automorphisms(g):
    return sorted(p for p in itertools.permutations(range(g.n))
                  if p != tuple(range(g.n)) and all(g.has_edge(p[u], p[v]) for u, v in g.edges))


@pytest.mark.parametrize("g", [cycle_graph(6), path_graph(5), star_graph(5),
                               random_quasi_tree(7, 3, 2, 1)])
def test_automorphisms_against_brute_force(g):
    assert graph_automorphisms(g) == _brute_automorphisms(g)


def test_automorphism_action_c6():
    act = automorphism_action(cycle_graph(6))
    assert len(act.enumerate(1)) == 12
    assert automorphism_action(path_graph(1)) is None


def test_non_isometry_rejected(c6):
    with pytest.raises(InvalidSpec):
        PermutationAction(c6, {"s": (1, 0, 2, 3, 4, 5)}, 0)
    with pytest.raises(InvalidSpec):
        PermutationAction(c6, {"s": (0, 0, 2, 3, 4, 5)}, 0)
    with pytest.raises(InvalidSpec):
        PermutationAction(c6, {"r": cycle_rotation(6)}, 9)


def test_rotation_words(c6):
    act = PermutationAction(c6, {"r": cycle_rotation(6)}, 0)
    assert set(act.generators) == {"r", "R"}
    assert len(act.enumerate(3)) == 6
    assert len(act.words(2)) == 1 + 2 + 4
    assert act.length(cycle_rotation(6, 3)) == 3
    assert act.orbit(3) == [0, 5, 1, 4, 2, 3]     # generators visited in sorted order ("R" < "r")
    with pytest.raises(InvalidSpec):
        act.element(["x"])
    with pytest.raises(SizeCapExceeded):
        act.enumerate(3, limit=3)


def test_rep_and_cocycle(c6):
    act = PermutationAction(c6, {"r": cycle_rotation(6)}, 0)
    s = act.element("rr")
    assert apply_rep(act, s, MeanZeroVector.dipole(0, 1)) == MeanZeroVector.dipole(2, 3)
    assert cocycle(act, s) == MeanZeroVector.dipole(2, 0)
    assert cocycle_identity_check(act, act.words(4)).passed


def test_cocycle_identity_detects_wrong_basepoint_move(c6):
    class Broken(PermutationAction):
        def act(self, s, x):
            return s[x] if x != 3 else 3
    act = Broken(c6, {"r": cycle_rotation(6)}, 0)
    assert not cocycle_identity_check(act, act.words(3)).passed


def test_cocycle_norm_c6(c6):
    act = PermutationAction(c6, {"r": cycle_rotation(6)}, 0)
    form = action_form(act)
    elems = act.enumerate(3)
    assert cocycle_norm_check(act, form, elems, metric=act.distance).passed
    for s in elems:
        d = c6.distances[s.value[0], 0]
        from qtk.gns import e_norm
        want = 0.0 if d == 0 else expected_cocycle_norm(d)
        assert e_norm(cocycle(act, s), form).e_norm == pytest.approx(want, abs=1e-12)


def test_rep_bound_c6(c6):
    act = PermutationAction(c6, {"r": cycle_rotation(6)}, 0)
    rep = rep_bound_report(act, action_form(act), act.enumerate(3), bound_constant=delta_x(c6))
    assert rep.passed
    assert 1 < rep.max_ratio <= 1 + math.sqrt(2) + 1e-9
    assert rep.identity_ratio == 1.0
    assert rep.samples == 200 + 15


def test_free_group_action():
    act = free_group_action(2, 5)
    form = action_form(act)
    assert form.certified_radius == 5
    elems = act.enumerate(5)
    assert cocycle_norm_check(act, form, elems, metric=act.distance).passed
    pr = properness_report(act, form, elems)
    assert pr.strictly_increasing
    for length, lo, hi, _ in pr.rows[1:]:
        assert lo == pytest.approx(math.sqrt(2 * length + 2) + 2) == pytest.approx(hi)
    with pytest.raises(ExplorationExceeded):
        act.act(("a",) * 5, ("a",))
    with pytest.raises(ExplorationExceeded):
        act.act((), ("a",) * 6)


def test_envelopes_free_group():
    act = free_group_action(2, 6)
    env = coarse_envelopes(act, action_form(act), act.enumerate(3), 1.0)
    assert env.passed
    assert env.pairs == len(act.enumerate(3)) ** 2


def test_product_action():
    c6, p3 = cycle_graph(6), path_graph(3)
    sp = ProductSpace((c6, p3), (0, 0))
    rot = [sp.flatten(((x + 1) % 6, y)) for x, y in map(sp.unflatten, range(sp.n_points))]
    act = PermutationAction(sp, {"r": rot}, sp.basepoint)
    form = action_form(act)
    elems = act.enumerate(4)
    assert cocycle_identity_check(act, act.words(4)).passed
    assert cocycle_norm_check(act, form, elems, metric=act.distance).passed
    bad = [sp.flatten((x, (y + 1) % 3)) for x, y in map(sp.unflatten, range(sp.n_points))]
    with pytest.raises(InvalidSpec):
        PermutationAction(sp, {"s": bad}, 0)


def test_regular_action_without_graph():
    act = RegularAction(IntegerLaw(), range(-4, 5))
    assert act.distance(3, -1) == 4
    assert act.act(2, 1) == 3
    with pytest.raises(ExplorationExceeded):
        act.act(4, 1)
    with pytest.raises(InvalidSpec):
        action_form(act)
