"""Group actions, the translation representation pi and the cocycle b(s) = delta_{s.a} - delta_a.

Elements are words in a symmetric generating set; two words are the same
element when their realized values agree (a permutation of the whole finite
space, or a reduced word / integer for the regular actions on explored
regions). Nothing is assumed about relations.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import ExplorationExceeded, InvalidSpec, SizeCapExceeded
from .gns import (GnsForm, MeanZeroVector, e_norm, gns_matrix, quadratic_batch,
                  random_mean_zero)
from .graph import Graph, ProductSpace
from .report import Verdict

GROUP_CAP = 100_000


def inverse_name(name: str) -> str:
    if len(name) == 1 and name.isalpha():
        return name.swapcase()
    if name.endswith("^-1"):
        return name[:-3]
    return name + "^-1"


@dataclass(frozen=True)
class GroupElement:
    word: tuple[str, ...]
    value: Hashable

    @property
    def length(self) -> int:
        return len(self.word)

    @property
    def name(self) -> str:
        return "".join(self.word) if all(len(w) == 1 for w in self.word) else ".".join(self.word)


class Action:
    """Common word machinery; subclasses supply the group law and the point action."""

    generators: dict
    basepoint: Hashable
    identity: Hashable

    def multiply(self, s, t):
        raise NotImplementedError

    def inverse(self, s):
        raise NotImplementedError

    def act(self, s, x):
        raise NotImplementedError

    def length(self, s) -> int:
        raise NotImplementedError

    def distance(self, x, y) -> int:
        raise NotImplementedError

    # words ----------------------------------------------------------------
    def element(self, word: Sequence[str]) -> GroupElement:
        val = self.identity
        for w in word:
            if w not in self.generators:
                raise InvalidSpec(f"unknown generator {w!r}")
            val = self.multiply(val, self.generators[w])
        return GroupElement(tuple(word), val)

    def compose(self, s: GroupElement, t: GroupElement) -> GroupElement:
        return GroupElement(s.word + t.word, self.multiply(s.value, t.value))

    def invert(self, s: GroupElement) -> GroupElement:
        return GroupElement(tuple(inverse_name(w) for w in reversed(s.word)), self.inverse(s.value))

    def enumerate(self, cap: int, limit: int = GROUP_CAP) -> list[GroupElement]:
        """Distinct elements of word length <= cap, each with a shortest word."""
        seen = {self.identity: GroupElement((), self.identity)}
        frontier = [seen[self.identity]]
        for _ in range(cap):
            nxt = []
            for s in frontier:
                for name in sorted(self.generators):
                    val = self.multiply(s.value, self.generators[name])
                    if val not in seen:
                        seen[val] = GroupElement(s.word + (name,), val)
                        nxt.append(seen[val])
                        if len(seen) > limit:
                            raise SizeCapExceeded(f"more than {limit} group elements")
            frontier = nxt
            if not frontier:
                break
        return list(seen.values())

    def words(self, cap: int) -> list[GroupElement]:
        """Every word (not just element) of length <= cap."""
        out = [GroupElement((), self.identity)]
        layer = out[:]
        names = sorted(self.generators)
        for _ in range(cap):
            layer = [GroupElement(s.word + (n,), self.multiply(s.value, self.generators[n]))
                     for s in layer for n in names]
            out.extend(layer)
        return out

    def orbit(self, cap: int) -> list:
        pts = []
        seen = set()
        for s in self.enumerate(cap):
            x = self.act(s.value, self.basepoint)
            if x not in seen:
                seen.add(x)
                pts.append(x)
        return pts


class PermutationAction(Action):
    """Isometric action on a finite graph or product given by vertex permutations."""

    def __init__(self, space: Graph | ProductSpace, generators: Mapping[str, Sequence[int]],
                 basepoint: int, word_cap: int = 4):
        self.space = space
        n = space.n if isinstance(space, Graph) else space.n_points
        self.n_points = n
        if not 0 <= basepoint < n:
            raise InvalidSpec(f"basepoint {basepoint} outside 0..{n - 1}")
        self.basepoint = int(basepoint)
        self.word_cap = word_cap
        self.identity = tuple(range(n))
        gens = {}
        for name, perm in generators.items():
            perm = tuple(int(p) for p in perm)
            if sorted(perm) != list(range(n)):
                raise InvalidSpec(f"generator {name!r} is not a permutation of 0..{n - 1}")
            self._check_isometry(name, perm)
            gens[name] = perm
        for name, perm in list(gens.items()):
            inv = self.inverse(perm)
            if inverse_name(name) not in gens and inv != perm:
                gens[inverse_name(name)] = inv
        self.generators = gens
        self._lengths: dict | None = None

    def _check_isometry(self, name: str, perm: tuple) -> None:
        if isinstance(self.space, Graph):
            for u, v in self.space.edges:
                if not self.space.has_edge(perm[u], perm[v]):
                    raise InvalidSpec(f"generator {name!r} does not preserve edge ({u},{v})")
        else:
            d = self.space.distances
            p = np.array(perm)
            if not (d[np.ix_(p, p)] == d).all():
                raise InvalidSpec(f"generator {name!r} is not an isometry of the product")

    def multiply(self, s, t):
        return tuple(s[x] for x in t)

    def inverse(self, s):
        inv = [0] * len(s)
        for x, y in enumerate(s):
            inv[y] = x
        return tuple(inv)

    def act(self, s, x):
        return s[x]

    def length(self, s) -> int:
        if self._lengths is None:
            self._lengths = {e.value: e.length for e in self.enumerate(cap=GROUP_CAP)}
        return self._lengths[s]

    def distance(self, x, y) -> int:
        return int(self.space.distances[x, y])


# -- regular actions on explored regions -----------------------------------

class FreeGroupLaw:
    """Free group on ``rank`` letters; elements are reduced words (tuples of letters)."""

    def __init__(self, rank: int):
        if not 1 <= rank <= 26:
            raise InvalidSpec("free group rank must be in 1..26")
        self.rank = rank
        letters = [chr(ord("a") + i) for i in range(rank)]
        self.generators = {c: (c,) for c in letters} | {c.upper(): (c.upper(),) for c in letters}
        self.identity = ()

    def multiply(self, u, v):
        out = list(u)
        for c in v:
            if out and out[-1] == c.swapcase():
                out.pop()
            else:
                out.append(c)
        return tuple(out)

    def inverse(self, u):
        return tuple(c.swapcase() for c in reversed(u))

    def length(self, u) -> int:
        return len(u)

    @staticmethod
    def label(u) -> str:
        return "".join(u) or "e"


class IntegerLaw:
    """The integers under addition, generated by +1 ('a') and -1 ('A')."""

    generators = {"a": 1, "A": -1}
    identity = 0

    def multiply(self, u, v):
        return u + v

    def inverse(self, u):
        return -u

    def length(self, u) -> int:
        return abs(u)

    @staticmethod
    def label(u) -> str:
        return str(u)


def cayley_region(law, radius: int) -> tuple[Graph, dict]:
    """Ball of the given radius in the (right) Cayley graph; returns graph and value -> vertex id."""
    index = {law.identity: 0}
    order = [law.identity]
    edges = set()
    q = deque([law.identity])
    while q:
        u = q.popleft()
        if law.length(u) >= radius:
            continue
        for g in sorted(law.generators):
            w = law.multiply(u, law.generators[g])
            if w not in index:
                index[w] = len(order)
                order.append(w)
                q.append(w)
            i, j = index[u], index[w]
            edges.add((min(i, j), max(i, j)))
    labels = {i: law.label(u) for i, u in enumerate(order)}
    return Graph(len(order), tuple(sorted(edges)), labels), index


class RegularAction(Action):
    """A group acting on itself by left multiplication, restricted to an explored region.

    Points are group elements; any image outside ``region`` raises
    ExplorationExceeded rather than being guessed.
    """

    def __init__(self, law, region: Iterable, word_cap: int = 4, graph: Graph | None = None,
                 index: Mapping | None = None):
        self.law = law
        self.region = frozenset(region)
        self.generators = dict(law.generators)
        self.identity = law.identity
        self.basepoint = law.identity
        self.word_cap = word_cap
        self.graph = graph
        self.index = index

    def multiply(self, s, t):
        return self.law.multiply(s, t)

    def inverse(self, s):
        return self.law.inverse(s)

    def act(self, s, x):
        if x not in self.region:
            raise ExplorationExceeded(f"point {x!r} is outside the explored region")
        y = self.law.multiply(s, x)
        if y not in self.region:
            raise ExplorationExceeded(f"{s!r} moves {x!r} outside the explored region")
        return y

    def length(self, s) -> int:
        return self.law.length(s)

    def distance(self, x, y) -> int:
        if self.graph is None:
            return self.law.length(self.law.multiply(self.law.inverse(y), x))
        ix, iy = self.index[x], self.index[y]
        if ix in self.graph._rows and iy not in self.graph._rows:
            ix, iy = iy, ix
        return int(self.graph.dist_row(iy)[ix])


def free_group_action(rank: int, radius: int, word_cap: int | None = None) -> RegularAction:
    law = FreeGroupLaw(rank)
    g, index = cayley_region(law, radius)
    return RegularAction(law, index, word_cap=radius if word_cap is None else word_cap,
                         graph=g, index=index)


def cycle_rotation(n: int, step: int = 1) -> tuple[int, ...]:
    return tuple((x + step) % n for x in range(n))


def graph_automorphisms(g: Graph, limit: int = 1000) -> list[tuple[int, ...]]:
    """All non-identity automorphisms (up to ``limit``) via VF2 matching."""
    import networkx as nx
    from networkx.algorithms.isomorphism import GraphMatcher

    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    out = []
    ident = tuple(range(g.n))
    for m in GraphMatcher(h, h).isomorphisms_iter():
        perm = tuple(m[x] for x in range(g.n))
        if perm != ident:
            out.append(perm)
        if len(out) >= limit:
            break
    return sorted(out)


def automorphism_action(g: Graph, basepoint: int | None = None, word_cap: int = 4,
                        limit: int = 1000) -> PermutationAction | None:
    """Action of the automorphism group; basepoint defaults to a point of largest orbit."""
    autos = graph_automorphisms(g, limit)
    if not autos:
        return None
    gens = {f"g{i}": p for i, p in enumerate(autos)}
    act = PermutationAction(g, gens, 0 if basepoint is None else basepoint, word_cap)
    if basepoint is None:
        elems = act.enumerate(cap=GROUP_CAP)
        best = max(range(g.n), key=lambda x: (len({e.value[x] for e in elems}), -x))
        act.basepoint = best
    return act


# -- representation and cocycle ---------------------------------------------

def apply_rep(action: Action, s: GroupElement, v: MeanZeroVector) -> MeanZeroVector:
    """pi(s) v: move each coefficient from x to s.x."""
    return MeanZeroVector({action.act(s.value, x): c for x, c in v.coeffs.items()})


def cocycle(action: Action, s: GroupElement) -> MeanZeroVector:
    """b(s) = delta_{s.a} - delta_a."""
    return MeanZeroVector.dipole(action.act(s.value, action.basepoint), action.basepoint)


def cocycle_identity_check(action: Action, elements: Sequence[GroupElement]) -> Verdict:
    """b(st) = pi(s) b(t) + b(s), coefficientwise and exactly, over all pairs."""
    b = {e.value: cocycle(action, e) for e in elements}
    checked = 0
    for s in elements:
        for t in elements:
            st = action.compose(s, t)
            lhs = b.get(st.value) or cocycle(action, st)
            rhs = apply_rep(action, s, b[t.value]) + b[s.value]
            checked += 1
            if lhs != rhs:
                return Verdict("cocycle_identity", False, checked,
                               {"s": s.name, "t": t.name, "lhs": lhs.coeffs, "rhs": rhs.coeffs})
    return Verdict("cocycle_identity", True, checked)


def expected_cocycle_norm(psi_value: float) -> float:
    return math.sqrt(2 * psi_value + 2) + 2


def cocycle_norm_check(action: Action, form: GnsForm, elements: Sequence[GroupElement],
                       metric: Callable | None = None, tol: float = 1e-12) -> Verdict:
    """||b(s)||_E = sqrt(2 m(s.a, a) + 2) + 2 (and 0 when s fixes a).

    ``metric`` defaults to the form's kernel; passing the graph distance also
    checks psi(s.a, a) = d(s.a, a).
    """
    a = action.basepoint
    worst = 0.0
    rows = []
    for s in elements:
        sa = action.act(s.value, a)
        got = e_norm(cocycle(action, s), form).e_norm
        if sa == a:
            want = 0.0
        else:
            m = (metric or form.psi)(sa, a)
            if metric is not None and form.psi(sa, a) != m:
                return Verdict("cocycle_norm", False, len(rows),
                               {"s": s.name, "psi": form.psi(sa, a), "metric": m})
            want = expected_cocycle_norm(m)
        err = abs(got - want)
        worst = max(worst, err)
        rows.append((s.name, got, want))
        if err > tol * max(1.0, want):
            return Verdict("cocycle_norm", False, len(rows), {"s": s.name, "norm": got, "expected": want})
    return Verdict("cocycle_norm", True, len(rows), evidence={"max_abs_error": worst})


@dataclass
class RepBoundReport:
    max_ratio: float
    defect: float
    bound_constant: float
    proven_bound: float
    generalized_bound: float
    chain_ok: bool
    identity_ratio: float
    samples: int
    elements: int

    @property
    def passed(self) -> bool:
        return (self.max_ratio <= self.proven_bound + 1e-9 and self.chain_ok
                and self.defect <= self.bound_constant + 1e-9 and abs(self.identity_ratio - 1) <= 1e-12)

    def to_json(self) -> dict:
        return {"max_ratio": self.max_ratio, "defect": self.defect,
                "bound_constant": self.bound_constant, "proven_bound": self.proven_bound,
                "generalized_bound": self.generalized_bound, "chain_ok": self.chain_ok,
                "identity_ratio": self.identity_ratio, "samples": self.samples,
                "elements": self.elements, "passed": self.passed}


def rep_bound_report(action: Action, form: GnsForm, elements: Sequence[GroupElement],
                     support: Sequence | None = None, n_random: int = 200, seed: int = 0,
                     bound_constant: float | None = None, max_dipoles: int = 2016) -> RepBoundReport:
    """Sampled operator-norm ratios ||pi(s)v||_E / ||v||_E against 1 + sqrt(bound_constant).

    The sample is ``n_random`` Gaussian mean-zero vectors on ``support`` plus
    every dipole delta_x - delta_y there, for each element. ``bound_constant``
    is Delta_X for d_a (or phi(e) in the weak-Haagerup case); when omitted the
    observed invariance defect D = max |psi(s.x, s.y) - psi(x, y)| is used.
    """
    pts = list(form.points if support is None else support)
    m = len(pts)
    rng = np.random.default_rng(seed)
    vs = random_mean_zero(rng, n_random, m)
    dip = []
    for i in range(m):
        for j in range(i + 1, m):
            if len(dip) >= max_dipoles:
                break
            row = np.zeros(m)
            row[i], row[j] = 1.0, -1.0
            dip.append(row)
    if dip:
        vs = np.vstack([vs, np.array(dip)])
    l1 = np.abs(vs).sum(axis=1)
    base_psi = form.matrix(pts)
    h2 = quadratic_batch(np.eye(m) - base_psi, vs)
    norm = np.sqrt(np.clip(h2, 0, None)) + l1
    max_ratio, defect, chain_ok, id_ratio = 0.0, 0.0, True, 1.0
    for s in elements:
        imgs = [action.act(s.value, x) for x in pts]
        psi_s = form.matrix(imgs)
        d_s = float(np.abs(psi_s - base_psi).max()) if m else 0.0
        h2_s = quadratic_batch(np.eye(m) - psi_s, vs)
        ratio = (np.sqrt(np.clip(h2_s, 0, None)) + l1) / norm
        chain_ok &= bool((np.abs(h2_s - h2) <= d_s * l1 ** 2 + 1e-9 * (1 + l1 ** 2)).all())
        max_ratio = max(max_ratio, float(ratio.max()))
        defect = max(defect, d_s)
        if s.value == action.identity:
            id_ratio = float(np.abs(ratio).max())
    const = defect if bound_constant is None else float(bound_constant)
    return RepBoundReport(max_ratio, defect, const, 1 + math.sqrt(const), 1 + math.sqrt(defect),
                          chain_ok, id_ratio, len(vs), len(elements))


@dataclass
class PropernessReport:
    rows: list                      # (length, min, max, count)
    strictly_increasing: bool
    lower_bound_ok: bool | None = None

    def to_json(self) -> dict:
        return {"rows": [{"length": l, "min": lo, "max": hi, "count": c} for l, lo, hi, c in self.rows],
                "strictly_increasing": self.strictly_increasing,
                "lower_bound_ok": self.lower_bound_ok}


def properness_report(action: Action, form: GnsForm, elements: Sequence[GroupElement],
                      phi: Mapping | None = None) -> PropernessReport:
    """Per word length, the min and max of ||b(s)||_E.

    With ``phi`` (weak-Haagerup data) also checks
    ||b(s)||_E >= sqrt(2 (phi(s) - phi(e)) + 2) + 2.
    """
    by_len: dict[int, list[float]] = {}
    ok = None if phi is None else True
    for s in elements:
        nv = e_norm(cocycle(action, s), form).e_norm
        by_len.setdefault(s.length, []).append(nv)
        if phi is not None and s.value != action.identity:
            lb = math.sqrt(max(2 * (phi[s.value] - phi[action.identity]) + 2, 0)) + 2
            ok &= nv >= lb - 1e-12 * lb
    rows = [(l, min(v), max(v), len(v)) for l, v in sorted(by_len.items())]
    mins = [r[1] for r in rows]
    inc = all(b > a for a, b in zip(mins, mins[1:]))
    return PropernessReport(rows, inc, ok)


@dataclass
class EnvelopeReport:
    identity_ok: bool
    bounds_ok: bool
    constant: float
    rows: list = field(default_factory=list)    # (length, rho_minus, rho_plus, count)
    pairs: int = 0
    witness: dict | None = None

    @property
    def passed(self) -> bool:
        return self.identity_ok and self.bounds_ok

    def to_json(self) -> dict:
        return {"displacement_identity": self.identity_ok, "bounds_ok": self.bounds_ok,
                "constant": self.constant, "pairs": self.pairs,
                "rows": [{"length": l, "rho_minus": lo, "rho_plus": hi, "count": c}
                         for l, lo, hi, c in self.rows],
                "witness": self.witness, "passed": self.passed}


def coarse_envelopes(action: Action, form: GnsForm, elements: Sequence[GroupElement],
                     constant: float, tol: float = 1e-9) -> EnvelopeReport:
    """Check b(t) - b(s) = pi(s) b(s^-1 t) and tabulate rho_-/rho_+ by l(s^-1 t)."""
    b = {e.value: cocycle(action, e) for e in elements}
    env: dict[int, list[float]] = {}
    ident_ok = bounds_ok = True
    witness = None
    pairs = 0
    for s in elements:
        s_inv = action.invert(s)
        for t in elements:
            u = action.compose(s_inv, t)
            bu = cocycle(action, u)
            disp = b[t.value] - b[s.value]
            pairs += 1
            if disp != apply_rep(action, s, bu):
                ident_ok = False
                witness = witness or {"s": s.name, "t": t.name}
                continue
            nd = e_norm(disp, form).e_norm
            nu = e_norm(bu, form).e_norm
            if not (nu / constant - tol * (1 + nu) <= nd <= constant * nu + tol * (1 + nu)):
                bounds_ok = False
                witness = witness or {"s": s.name, "t": t.name, "disp": nd, "b_u": nu}
            env.setdefault(action.length(u.value), []).append(nd)
    rows = [(l, min(v), max(v), len(v)) for l, v in sorted(env.items())]
    return EnvelopeReport(ident_ok, bounds_ok, constant, rows, pairs, witness)


FiniteAction = PermutationAction


def action_form(action: Action, points: Sequence | None = None) -> GnsForm:
    """GNS form with psi = d_a for the action's basepoint.

    Finite graphs and products use the exact tables; regular actions use the
    explored Cayley region, so values there are certified within its radius.
    """
    from .separation import build_table, product_separation

    if isinstance(action, PermutationAction):
        sp = action.space
        if isinstance(sp, Graph):
            da = build_table(sp, action.basepoint).da
        else:
            base = sp.unflatten(action.basepoint)
            da = product_separation(sp.factors, base).da
        pts = tuple(points) if points is not None else tuple(action.orbit(GROUP_CAP))
        return GnsForm(pts, lambda x, y: int(da[x, y]), "d_a")
    if isinstance(action, RegularAction) and action.graph is not None:
        table = build_table(action.graph, action.index[action.basepoint])
        idx = action.index
        radius = max(action.law.length(u) for u in action.region)
        pts = tuple(points) if points is not None else tuple(idx)
        return GnsForm(pts, lambda x, y: table.da_at(idx[x], idx[y]), "d_a",
                       certified_radius=radius)
    raise InvalidSpec("no d_a form for this action; supply a GnsForm explicitly")
