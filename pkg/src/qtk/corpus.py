"""The reproducible test corpus and the check routines run over it."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import action as act_mod
from .action import (Action, GroupElement, PermutationAction, automorphism_action, action_form,
                     coarse_envelopes, cocycle_identity_check, cocycle_norm_check, cycle_rotation,
                     free_group_action, properness_report, rep_bound_report)
from .graph import (DEFAULT_CAP, Graph, ProductSpace, cycle_graph, path_graph, random_quasi_tree,
                    random_tree)
from .gns import (GnsForm, MeanZeroVector, gns_matrix, l1_witness, quadratic_batch,
                  random_mean_zero, table_form)
from .haagerup import integer_instance, load_weak_haagerup
from .kernels import (check_rate, cnd_check, default_t_grid, embedding_inner, explicit_embedding,
                      gram_identity_check, gram_power, psd_check, schoenberg_scan, tensor_inner)
from .report import Verdict
from .separation import (all_tables, ball_equality_check, build_balls, delta_x,
                         product_separation, range_lemma_check, sandwich_check,
                         ultrametric_check, nesting_check)

ALL_RATES = tuple(Fraction(i, 10) for i in range(1, 10))
PSD_RATES = (Fraction(1, 10), Fraction(1, 2), Fraction(9, 10))


@dataclass
class CorpusConfig:
    seed: int = 0
    sizes: str = "small"
    tol: float = 1e-9
    cap: int = DEFAULT_CAP
    trees: int = 12
    tree_max: int = 20
    quasi: int = 12
    quasi_max: int = 20
    products2: int = 3
    products3: int = 2
    product_factor_max: int = 6
    gns_vectors: int = 2000
    witness_vectors: int = 4
    witness_samples: int = 20000
    free_radius: int = 8
    rep_vectors: int = 200

    @classmethod
    def preset(cls, sizes: str, seed: int = 0, **kw) -> "CorpusConfig":
        if sizes == "small":
            return cls(seed=seed, sizes=sizes, **kw)
        if sizes == "medium":
            return cls(seed=seed, sizes=sizes, trees=50, tree_max=32, quasi=50, quasi_max=30,
                       products2=5, products3=5, gns_vectors=10_000, witness_vectors=20,
                       witness_samples=100_000, **kw)
        raise ValueError(f"unknown size preset {sizes!r}")


def random_trees(count: int, n_max: int, seed: int) -> list[Graph]:
    rng = np.random.default_rng([seed, 11])
    return [random_tree(int(rng.integers(2, n_max + 1)), int(rng.integers(1 << 31)))
            for _ in range(count)]


def random_quasi_trees(count: int, n_max: int, seed: int) -> list[Graph]:
    rng = np.random.default_rng([seed, 13])
    out = []
    for _ in range(count):
        n = int(rng.integers(4, n_max + 1))
        out.append(random_quasi_tree(n, int(rng.integers(2, 5)), int(rng.integers(1, max(2, n // 3) + 1)),
                                     int(rng.integers(1 << 31))))
    return out


def random_factors(count: int, n_max: int, rng: np.random.Generator) -> list[Graph]:
    out = []
    for _ in range(count):
        kind = int(rng.integers(3))
        n = int(rng.integers(3, n_max + 1))
        if kind == 0:
            out.append(random_tree(n, int(rng.integers(1 << 31))))
        elif kind == 1:
            out.append(cycle_graph(n))
        else:
            out.append(random_quasi_tree(n, 3, 1, int(rng.integers(1 << 31))))
    return out


def random_products(count: int, arity: int, n_max: int, seed: int) -> list[tuple[Graph, ...]]:
    rng = np.random.default_rng([seed, 17, arity])
    return [tuple(random_factors(arity, n_max, rng)) for _ in range(count)]


def _merge(name: str, verdicts: Sequence[Verdict]) -> Verdict:
    bad = next((v for v in verdicts if not v.passed), None)
    return Verdict(name, bad is None, sum(v.checked for v in verdicts),
                   None if bad is None else bad.witness)


# -- graph-level checks -------------------------------------------------------

def tree_identity(g: Graph, tables=None) -> Verdict:
    tables = all_tables(g) if tables is None else tables
    bad = [t.basepoint for t in tables if not (t.da == g.distances).all()]
    dx = delta_x(g, tables)
    return Verdict("tree_identity", not bad and dx == 0, len(tables) * g.n ** 2,
                   {"basepoints": bad[:5]} if bad else None, {"delta_x": dx})


def lemma_checks(tables) -> list[Verdict]:
    balls = [build_balls(t) for t in tables]
    return [_merge("ultrametric", [ultrametric_check(t) for t in tables]),
            _merge("range_lemma", [range_lemma_check(t) for t in tables]),
            _merge("ball_equality", [ball_equality_check(b) for b in balls]),
            _merge("ball_nesting", [nesting_check(b) for b in balls])]


def gram_identity_all(tables, rates=ALL_RATES) -> Verdict:
    return _merge("gram_identity", [gram_identity_check(t, build_balls(t), rates) for t in tables])


def psd_all(tables, rates=PSD_RATES, tol: float = 1e-9) -> Verdict:
    worst = math.inf
    n = 0
    for t in tables:
        for r in rates:
            rep = psd_check(gram_power(t.da, r), tol)
            n += 1
            worst = min(worst, rep.min_eigenvalue / max(rep.scale, 1e-300))
            if not rep.psd:
                return Verdict("gram_psd", False, n, {"a": t.basepoint, "rate": r,
                                                      "min_eigenvalue": rep.min_eigenvalue})
    return Verdict("gram_psd", True, n, evidence={"min_relative_eigenvalue": worst})


def cnd_all(tables, tol: float = 1e-9) -> Verdict:
    worst = math.inf
    for i, t in enumerate(tables):
        rep = cnd_check(t.da, tol)
        worst = min(worst, rep.min_eigenvalue / max(rep.scale, 1e-300))
        if not rep.psd:
            return Verdict("cnd", False, i + 1, {"a": t.basepoint, "min_eigenvalue": rep.min_eigenvalue})
    return Verdict("cnd", True, len(tables), evidence={"min_relative_eigenvalue": worst})


def schoenberg_all(tables, t_grid=None, tol: float = 1e-9) -> Verdict:
    """Forward Schoenberg direction: CND-certified kernels give PSD exp(-t psi) on the grid."""
    for i, t in enumerate(tables):
        if not cnd_check(t.da, tol).psd:
            continue
        scan = schoenberg_scan(t.da, t_grid, tol)
        if not scan.passed:
            bad = next(tt for tt, r in scan.results if not r.psd)
            return Verdict("schoenberg", False, i + 1, {"a": t.basepoint, "t": bad})
    return Verdict("schoenberg", True, len(tables) * len(default_t_grid() if t_grid is None else t_grid))


def gns_positivity(form: GnsForm, count: int, seed: int, tol: float = 1e-9) -> Verdict:
    """<v, v>_psi >= sum v(x)^2 on random mean-zero vectors; <v, v> = 0 only for v = 0."""
    pts = list(form.points)
    g = gns_matrix(form, pts)
    vs = random_mean_zero(np.random.default_rng(seed), count, len(pts))
    q = quadratic_batch(g, vs)
    sq = (vs * vs).sum(axis=1)
    scale = float(np.abs(form.matrix(pts)).max(initial=0.0)) + 1.0
    ok = bool((q >= sq - tol * scale * sq).all()) and bool((q > 0).all())
    zero = quadratic_batch(g, np.zeros((1, len(pts))))[0] == 0
    return Verdict("gns_positivity", ok and bool(zero), count,
                   evidence={"min_excess": float((q - sq).min()), "min_self_inner": float(q.min())})


def graph_checks(g: Graph, cfg: CorpusConfig, is_tree: bool = False) -> list[Verdict]:
    tables = all_tables(g)
    sw = sandwich_check(g, cap=cfg.cap, tables=tables)
    out = [Verdict("sandwich", sw.passed, len(tables) * g.n ** 2,
                   sw.violations[0] if sw.violations else None, sw.to_json())]
    if is_tree:
        out.append(tree_identity(g, tables))
    out += lemma_checks(tables)
    out.append(gram_identity_all(tables))
    out.append(psd_all(tables, tol=cfg.tol))
    out.append(cnd_all(tables, cfg.tol))
    out.append(schoenberg_all(tables[:1], tol=cfg.tol))
    if g.n >= 2:
        out.append(gns_positivity(table_form(tables[0].da), cfg.gns_vectors, cfg.seed, cfg.tol))
    return out


def product_checks(factors: Sequence[Graph], cfg: CorpusConfig, seed: int) -> list[Verdict]:
    """Product d_a is the factor sum; tensor Gram identity; Delta_X additivity; PSD/CND."""
    rng = np.random.default_rng([seed, 23])
    space_pts = int(np.prod([g.n for g in factors]))
    base = tuple(int(rng.integers(g.n)) for g in factors)
    ps = product_separation(factors, base)
    space = ProductSpace(tuple(factors), base)
    da = ps.da
    # additivity of d_a, pointwise
    ok_sum = all(int(da[i, j]) == sum(int(t.da[u, v]) for t, u, v in
                                     zip(ps.tables, space.unflatten(i), space.unflatten(j)))
                 for i in range(space_pts) for j in range(space_pts))
    gap = int((space.distances - da).max())
    per_a_gaps = []
    dx_sum = sum(delta_x(g) for g in factors)
    out = [Verdict("product_da_sum", ok_sum, space_pts ** 2),
           Verdict("product_delta_x", gap <= dx_sum, 1,
                   evidence={"gap_at_basepoint": gap, "sum_factor_delta_x": dx_sum})]
    # tensor identity over all pairs and all rates
    balls = [build_balls(t) for t in ps.tables]
    checked = 0
    tensor_ok = True
    witness = None
    for r in ALL_RATES:
        factor_vals = []
        for t, b in zip(ps.tables, balls):
            vecs = [explicit_embedding(t, b, r, x) for x in range(t.graph.n)]
            factor_vals.append([[embedding_inner(u, v) for v in vecs] for u in vecs])
        powers = {}
        for i in range(space_pts):
            xi = space.unflatten(i)
            for j in range(i, space_pts):
                xj = space.unflatten(j)
                got = tensor_inner([fv[u][v] for fv, u, v in zip(factor_vals, xi, xj)])
                e = int(da[i, j])
                want = powers.get(e) or powers.setdefault(e, r ** e)
                checked += 1
                if got != want:
                    tensor_ok = False
                    witness = witness or {"x": xi, "y": xj, "rate": r}
    out.append(Verdict("tensor_gram_identity", tensor_ok, checked, witness))
    if space_pts <= 100:
        reps = [psd_check(gram_power(da, r), cfg.tol) for r in PSD_RATES]
        out.append(Verdict("product_gram_psd", all(r.psd for r in reps), len(reps),
                           evidence={"min_eigenvalues": [r.min_eigenvalue for r in reps]}))
        c = cnd_check(da, cfg.tol)
        out.append(Verdict("product_cnd", c.psd, 1, evidence=c.to_json()))
    return out


# -- action checks ------------------------------------------------------------

@dataclass
class ActionCase:
    name: str
    action: Action
    form: GnsForm
    bound_constant: float | None
    metric: object = None
    support: list | None = None
    rep_cap: int = 4
    norm_cap: int = 4
    env_cap: int = 3
    phi: dict | None = None
    identity_words: bool = True
    identity_cap: int = 4


def action_checks(case: ActionCase, cfg: CorpusConfig) -> tuple[list[Verdict], dict]:
    a = case.action
    rep_elems = a.enumerate(case.rep_cap)
    rb = rep_bound_report(a, case.form, rep_elems, support=case.support, n_random=cfg.rep_vectors,
                          seed=cfg.seed, bound_constant=case.bound_constant)
    out = [Verdict("rep_bound", rb.passed, rb.samples * rb.elements, evidence=rb.to_json())]
    k = case.identity_cap
    words = a.words(k) if case.identity_words and _word_count(a, k) <= 2000 else a.enumerate(k)
    out.append(cocycle_identity_check(a, words))
    norm_elems = a.enumerate(case.norm_cap)
    out.append(cocycle_norm_check(a, case.form, norm_elems, metric=case.metric))
    pr = properness_report(a, case.form, norm_elems, phi=case.phi)
    prop_ok = pr.lower_bound_ok is not False
    out.append(Verdict("properness", prop_ok, len(norm_elems), evidence=pr.to_json()))
    env = coarse_envelopes(a, case.form, a.enumerate(case.env_cap), max(rb.max_ratio, 1.0))
    out.append(Verdict("coarse_envelopes", env.passed, env.pairs, env.witness, env.to_json()))
    return out, {"rep_bound": rb, "properness": pr, "envelopes": env}


def _word_count(a: Action, cap: int) -> int:
    k = len(a.generators)
    return sum(k ** i for i in range(cap + 1))


def cycle_case(n: int = 6) -> ActionCase:
    g = cycle_graph(n)
    act = PermutationAction(g, {"r": cycle_rotation(n)}, 0)
    return ActionCase(f"cycle{n}_rotation", act, action_form(act), delta_x(g), act.distance)


def automorphism_case(name: str, g: Graph, limit: int = 600) -> ActionCase | None:
    autos = act_mod.graph_automorphisms(g, limit + 1)
    if not autos or len(autos) > limit:
        return None
    act = automorphism_action(g, limit=limit)
    return ActionCase(name, act, action_form(act), delta_x(g), act.distance, rep_cap=1, norm_cap=1,
                      env_cap=1, identity_words=False)


def product_action_case() -> ActionCase:
    """C6 x P4: rotation on the first factor, reflection on the second."""
    c6, p4 = cycle_graph(6), path_graph(4)
    space = ProductSpace((c6, p4), (0, 0))
    rot = [space.flatten((cycle_rotation(6)[x], y)) for x, y in map(space.unflatten, range(space.n_points))]
    ref = [space.flatten((x, 3 - y)) for x, y in map(space.unflatten, range(space.n_points))]
    act = PermutationAction(space, {"r": rot, "f": ref}, space.basepoint)
    return ActionCase("c6xp4_product", act, action_form(act), delta_x(c6) + delta_x(p4), act.distance)


def free_group_case(radius: int = 8, rank: int = 2) -> ActionCase:
    act = free_group_action(rank, radius)
    form = action_form(act)
    support = [x for x in act.region if len(x) <= 2]
    return ActionCase(f"free_group_rank_{rank}", act, form, 0.0, act.distance, support=support,
                      rep_cap=min(4, radius - 2), norm_cap=radius, env_cap=min(3, radius // 2),
                      identity_cap=min(4, radius // 2))


def haagerup_case(radius: int = 8):
    data = integer_instance(radius)
    rep = load_weak_haagerup(data)
    act = data.action()
    rep_cap = radius // 2
    support = [x for x in data.elements if abs(x) <= radius - rep_cap]
    case = ActionCase("z_weak_haagerup", act, rep.form, rep.phi_e, None, support=support,
                      rep_cap=rep_cap, norm_cap=radius, env_cap=3, phi=data.phi,
                      identity_cap=radius // 2)
    return case, rep


def witness_checks(graphs: Sequence[Graph], count: int, samples: int, seed: int) -> Verdict:
    rng = np.random.default_rng([seed, 29])
    rows = []
    ok = True
    for i in range(count):
        g = graphs[i % len(graphs)]
        tab = all_tables(g)[0] if g.n <= 64 else None
        form = table_form(tab.da)
        k = int(rng.integers(2, min(g.n, 8) + 1))
        pts = rng.choice(g.n, size=k, replace=False)
        c = rng.standard_normal(k)
        c -= c.mean()
        v = MeanZeroVector({int(p): float(x) for p, x in zip(pts, c)})
        w = l1_witness(v, form, samples, seed=int(rng.integers(1 << 31)))
        rows.append(w.to_json())
        ok &= w.within_3se
    return Verdict("l1_witness", ok, count, evidence={"rows": rows})


# -- driver -------------------------------------------------------------------

def run_corpus(cfg: CorpusConfig) -> dict:
    checks: list[dict] = []

    def add(prefix: str, verdicts: Sequence[Verdict]):
        for v in verdicts:
            d = v.to_json()
            d["name"] = f"{prefix}/{v.name}"
            checks.append(d)

    trees = random_trees(cfg.trees, cfg.tree_max, cfg.seed)
    quasi = random_quasi_trees(cfg.quasi, cfg.quasi_max, cfg.seed)
    fixed = {"path5": path_graph(5), "path8": path_graph(8), "cycle4": cycle_graph(4),
             "cycle6": cycle_graph(6), "cycle9": cycle_graph(9)}
    for name, g in fixed.items():
        add(name, graph_checks(g, cfg, is_tree=name.startswith("path")))
    for i, g in enumerate(trees):
        add(f"tree{i}", graph_checks(g, cfg, is_tree=True))
    for i, g in enumerate(quasi):
        add(f"quasi{i}", graph_checks(g, cfg))
    for arity, count in ((2, cfg.products2), (3, cfg.products3)):
        for i, fs in enumerate(random_products(count, arity, cfg.product_factor_max, cfg.seed)):
            add(f"product{arity}_{i}", product_checks(fs, cfg, cfg.seed + i))

    cases = [cycle_case(6), product_action_case(), free_group_case(cfg.free_radius)]
    for i, g in enumerate(quasi + trees):
        c = automorphism_case(f"auto{i}", g)
        if c is not None:
            cases.append(c)
    observed = {}
    for case in cases:
        vs, extra = action_checks(case, cfg)
        observed[case.name] = extra["rep_bound"].max_ratio
        add(case.name, vs)
    hcase, hrep = haagerup_case()
    hv = [Verdict("weak_haagerup_load", hrep.form.certificate.psd and hrep.bound_constant == 1.0
                  and hrep.properness_ok, len(hrep.properness_rows), evidence=hrep.to_json())]
    vs, _ = action_checks(hcase, cfg)
    add(hcase.name, hv + vs)
    add("witness", [witness_checks(quasi + trees, cfg.witness_vectors, cfg.witness_samples, cfg.seed)])

    passed = all(c["passed"] for c in checks)
    return {"checks": checks, "passed": passed,
            "results": {"graphs": {"trees": len(trees), "quasi_trees": len(quasi), "fixed": len(fixed)},
                        "actions": sorted(observed), "observed_rep_bounds": observed,
                        "total_checks": len(checks),
                        "failed": [c["name"] for c in checks if not c["passed"]]}}
