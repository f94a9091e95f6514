"""Command line interface: ``qtk kernel | certify | gns | action | corpus``.

Every command writes one deterministic JSON report (sorted keys, no timing
unless ``--timing``). Exit codes: 0 all checks pass, 1 a check failed,
2 usage / invalid input, 3 a size or exploration cap was exceeded.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import time
from pathlib import Path

from . import __version__
from .action import (PermutationAction, action_form, automorphism_action, cycle_rotation,
                     free_group_action)
from .corpus import (ALL_RATES, ActionCase, CorpusConfig, action_checks, cnd_all, gram_identity_all,
                     lemma_checks, psd_all, run_corpus, schoenberg_all, tree_identity)
from .errors import InvalidSpec, QtkError
from .gns import MeanZeroVector, e_norm, gns_inner, l1_witness, table_form
from .graph import DEFAULT_CAP, Graph, cycle_graph, generate
from .haagerup import WeakHaagerupData, load_weak_haagerup
from .kernels import check_rate, cnd_check, gram_power, psd_check, schoenberg_scan
from .report import SCHEMA_VERSION, Verdict, dumps, parse_rational
from .separation import all_tables, build_table, delta_x, sandwich_check

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(QtkError):
    code = "usage"
    exit_code = EXIT_USAGE


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- input helpers ------------------------------------------------------------

def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidSpec(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"{path} is not valid JSON: {exc}") from exc


def read_graph(path: str) -> Graph:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise InvalidSpec("graph JSON must be an object")
    return generate(data) if "family" in data else Graph.from_json(data)


def _coeff(v):
    if isinstance(v, bool):
        raise InvalidSpec("coefficients must be numbers")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        q = parse_rational(v)
        return q.numerator if q.denominator == 1 else q
    raise InvalidSpec(f"bad coefficient {v!r}")


def read_vector(path: str, g: Graph) -> MeanZeroVector:
    data = _read_json(path)
    coeffs = data.get("coeffs") if isinstance(data, dict) else None
    if not isinstance(coeffs, dict):
        raise InvalidSpec('vector JSON must be {"coeffs": {vertex: value}}')
    try:
        return MeanZeroVector({g.check_vertex(int(k)): _coeff(v) for k, v in coeffs.items()})
    except ValueError as exc:
        if isinstance(exc, QtkError):
            raise
        raise InvalidSpec(str(exc)) from exc


def _is_tree(g: Graph) -> bool:
    return len(g.edges) == g.n - 1


# -- commands -----------------------------------------------------------------

def cmd_kernel(args) -> tuple[list[Verdict], dict]:
    g = read_graph(args.graph)
    tables = all_tables(g)
    sw = sandwich_check(g, cap=args.cap, tables=tables)
    checks = [Verdict("sandwich", sw.passed, len(tables) * g.n ** 2,
                      sw.violations[0] if sw.violations else None, sw.to_json())]
    if _is_tree(g):
        checks.append(tree_identity(g, tables))
    chosen = tables if args.all_basepoints else [tables[g.check_vertex(args.basepoint)]]
    checks += lemma_checks(chosen)
    results = {"n": g.n, "edges": len(g.edges), "delta": sw.delta, "delta_prime": sw.delta_prime,
               "delta_x": sw.delta_x, "max_gap": sw.max_gap,
               "tables": {str(t.basepoint): {"R": t.R, "d_a": t.da} for t in chosen}}
    return checks, results


def cmd_certify(args) -> tuple[list[Verdict], dict]:
    g = read_graph(args.graph)
    t = build_table(g, g.check_vertex(args.basepoint))
    rates = [check_rate(parse_rational(r)) for r in args.rate] if args.rate else list(ALL_RATES)
    gram = gram_identity_all([t], rates)
    checks = [gram, psd_all([t], rates, args.tol), cnd_all([t], args.tol)]
    results = {"basepoint": t.basepoint, "rates": rates,
               "gram_identity": "exact" if gram.passed else "fail",
               "gram_spectra": {str(r): psd_check(gram_power(t.da, r), args.tol).to_json() for r in rates},
               "cnd": cnd_check(t.da, args.tol).to_json()}
    if args.schoenberg:
        checks.append(schoenberg_all([t], tol=args.tol))
        results["schoenberg"] = schoenberg_scan(t.da, tol=args.tol).to_json()
    return checks, results


def cmd_gns(args) -> tuple[list[Verdict], dict]:
    g = read_graph(args.graph)
    t = build_table(g, g.check_vertex(args.basepoint))
    form = table_form(t.da)
    v = read_vector(args.vector, g)
    inner = gns_inner(v, v, form)
    norm = e_norm(v, form)
    checks = [Verdict("self_inner_nonnegative", inner >= 0, 1, evidence={"self_inner": inner}),
              Verdict("l1_lower_bound", inner >= sum(c * c for c in v.coeffs.values()), 1)]
    results = {"basepoint": t.basepoint, "self_inner": inner, "h_norm": norm.h_norm,
               "l1_norm": norm.l1_norm, "e_norm": norm.e_norm}
    if args.l1_witness:
        w = l1_witness(v, form, args.l1_witness, args.seed)
        checks.append(Verdict("l1_witness", w.within_3se, w.samples, evidence=w.to_json()))
        results["l1_witness"] = w.to_json()
    return checks, results


_FREE = re.compile(r"free_group_rank_(\d+)$")
RULES = ("cycle_rotation", "graph_automorphism")


def build_action_case(spec: dict, graph: Graph | None, word_cap: int) -> ActionCase:
    """Action JSON: {"generators": {name: permutation | rule-name}, "basepoint": v, "word_cap": n}.

    Rule names: "free_group_rank_k" (Cayley tree, explored to ``radius``, default 8),
    "cycle_rotation" (one-step rotation of the cycle given by --graph or ``n``) and
    "graph_automorphism" (every automorphism of --graph).
    """
    gens = spec.get("generators")
    if not isinstance(gens, dict) or not gens:
        raise InvalidSpec("action JSON needs a non-empty generators object")
    cap = int(spec.get("word_cap", word_cap))
    rules = {v for v in gens.values() if isinstance(v, str)}
    free = [m for m in map(_FREE.match, rules) if m]
    if free:
        if len(rules) != 1 or len(gens) != len([v for v in gens.values() if isinstance(v, str)]):
            raise InvalidSpec("free_group_rank_k cannot be combined with other generators")
        rank = int(free[0].group(1))
        radius = int(spec.get("radius", 8))
        if radius < 3:
            raise InvalidSpec("free group region needs radius >= 3")
        act = free_group_action(rank, radius)
        support = [x for x in act.region if len(x) <= 2]
        return ActionCase(f"free_group_rank_{rank}", act, action_form(act), 0.0, act.distance,
                          support=support, rep_cap=min(cap, radius - 2), norm_cap=radius,
                          env_cap=min(3, radius // 2), identity_cap=min(cap, radius // 2))
    unknown = rules - set(RULES)
    if unknown:
        raise InvalidSpec(f"unknown generator rule {sorted(unknown)[0]!r}")
    g = graph
    if g is None and "cycle_rotation" in rules and "n" in spec:
        g = cycle_graph(int(spec["n"]))
    if g is None:
        raise InvalidSpec("this action needs --graph")
    basepoint = spec.get("basepoint")
    if "graph_automorphism" in rules:
        if len(gens) != 1:
            raise InvalidSpec("graph_automorphism must be the only generator")
        act = automorphism_action(g, None if basepoint is None else int(basepoint), cap)
        if act is None:
            raise InvalidSpec("graph has no non-trivial automorphisms")
        return ActionCase("graph_automorphism", act, action_form(act), delta_x(g), act.distance,
                          rep_cap=1, norm_cap=1, env_cap=1, identity_words=False, identity_cap=1)
    perms = {}
    for name, val in gens.items():
        if val == "cycle_rotation":
            val = cycle_rotation(g.n)
        if not isinstance(val, list | tuple):
            raise InvalidSpec(f"generator {name!r} must be a permutation or a rule name")
        try:
            perms[str(name)] = tuple(int(i) for i in val)
        except (TypeError, ValueError) as exc:
            raise InvalidSpec(f"generator {name!r}: {exc}") from exc
    act = PermutationAction(g, perms, int(basepoint or 0), cap)
    return ActionCase("generators", act, action_form(act), delta_x(g), act.distance,
                      rep_cap=cap, norm_cap=cap, env_cap=min(cap, 3))


def cmd_action(args) -> tuple[list[Verdict], dict]:
    cfg = CorpusConfig(seed=args.seed, tol=args.tol, cap=args.cap)
    checks: list[Verdict] = []
    results: dict = {}
    if args.weak_haagerup:
        data = WeakHaagerupData.from_json(_read_json(args.weak_haagerup))
        rep = load_weak_haagerup(data)
        checks.append(Verdict("weak_haagerup_load", rep.form.certificate.psd and rep.properness_ok,
                              len(rep.properness_rows), evidence=rep.to_json()))
        act = data.action()
        radius = max(abs(e) for e in data.elements)
        rep_cap = max(radius // 2, 1)
        case = ActionCase("weak_haagerup", act, rep.form, rep.phi_e, None,
                          support=[x for x in data.elements if abs(x) <= radius - rep_cap],
                          rep_cap=rep_cap, norm_cap=radius, env_cap=max(min(3, radius // 2), 1),
                          phi=data.phi, identity_cap=max(min(args.word_cap, radius // 2), 1))
    else:
        if not args.action:
            raise UsageError("action needs --action or --weak-haagerup")
        spec = _read_json(args.action)
        if not isinstance(spec, dict):
            raise InvalidSpec("action JSON must be an object")
        graph = read_graph(args.graph) if args.graph else None
        case = build_action_case(spec, graph, args.word_cap)
    vs, extra = action_checks(case, cfg)
    checks += vs
    results.update({"action": case.name, "rep_bound": extra["rep_bound"].to_json(),
                    "properness": extra["properness"].to_json(),
                    "envelopes": extra["envelopes"].to_json()})
    return checks, results


def cmd_corpus(args) -> tuple[list[Verdict], dict]:
    cfg = CorpusConfig.preset(args.sizes, seed=args.seed, tol=args.tol, cap=args.cap)
    rep = run_corpus(cfg)
    return rep["checks"], rep["results"]


COMMANDS = {"kernel": cmd_kernel, "certify": cmd_certify, "gns": cmd_gns, "action": cmd_action,
            "corpus": cmd_corpus}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--tol", type=float, default=1e-9, help="relative PSD tolerance")
    common.add_argument("--cap", type=int, default=DEFAULT_CAP, help="size cap for exhaustive scans")
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing")

    p = _Parser(prog="qtk", description="Separation kernels on graphs and their group actions.")
    p.add_argument("--version", action="version", version=f"qtk {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel", parents=[common], help="R_a / d_a tables and sandwich bounds")
    k.add_argument("--graph", required=True)
    k.add_argument("--basepoint", type=int, default=0)
    k.add_argument("--all-basepoints", action="store_true")

    c = sub.add_parser("certify", parents=[common], help="Gram identity, PSD, CND, Schoenberg")
    c.add_argument("--graph", required=True)
    c.add_argument("--basepoint", type=int, default=0)
    c.add_argument("--rate", action="append", help="rate r as p/q; repeatable (default 1/10..9/10)")
    c.add_argument("--schoenberg", action="store_true")

    gn = sub.add_parser("gns", parents=[common], help="GNS norms and the L1 witness")
    gn.add_argument("--graph", required=True)
    gn.add_argument("--basepoint", type=int, default=0)
    gn.add_argument("--vector", required=True)
    gn.add_argument("--l1-witness", type=int, default=0, metavar="N",
                    help="Monte-Carlo samples for the L1 witness (0 = skip)")

    a = sub.add_parser("action", parents=[common], help="representation, cocycle and envelopes")
    a.add_argument("--action")
    a.add_argument("--graph")
    a.add_argument("--weak-haagerup")
    a.add_argument("--word-cap", type=int, default=4)

    co = sub.add_parser("corpus", parents=[common], help="run every check on the standard corpus")
    co.add_argument("--sizes", choices=["small", "medium"], default="small")
    return p


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "timing")}


def _emit(report: dict, out: str | None) -> None:
    text = dumps(report)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qtk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {"schema_version": SCHEMA_VERSION, "command": args.command, "config": _config(args)}
    start = time.perf_counter()
    try:
        checks, results = COMMANDS[args.command](args)
    except QtkError as exc:
        report.update({"passed": False, "error": {"code": exc.code, "message": str(exc)}})
        _emit(report, args.out)
        print(f"qtk: {exc.code}: {exc}", file=sys.stderr)
        return exc.exit_code
    rows = [c if isinstance(c, dict) else c.to_json() for c in checks]
    passed = all(r["passed"] for r in rows)
    report.update({"checks": rows, "results": results, "passed": passed})
    if args.timing:
        report["timing"] = {"seconds": time.perf_counter() - start}
    _emit(report, args.out)
    failed = [r["name"] for r in rows if not r["passed"]]
    print(f"qtk {args.command}: {len(rows) - len(failed)}/{len(rows)} checks passed"
          + (f"; failed: {', '.join(failed[:10])}" if failed else ""), file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
