"""How close does the observed gap max(d - d_a) come to the bound 6*Delta + 2?

Prints one row per graph family: the bottleneck constant, the worst gap and
the bound, aggregated over random instances.

    python scripts/gap_tightness.py --count 40 --n-max 28 --seed 0
"""
import argparse
from collections import defaultdict
from dataclasses import asdict, dataclass

from qtk.corpus import random_quasi_trees, random_trees
from qtk.graph import cycle_graph
from qtk.separation import sandwich_check


@dataclass
class GapConfig:
    count: int = 40
    n_max: int = 28
    seed: int = 0


def rows(cfg: GapConfig):
    families = {
        "tree": random_trees(cfg.count, cfg.n_max, cfg.seed),
        "quasi_tree": random_quasi_trees(cfg.count, cfg.n_max, cfg.seed),
        "cycle": [cycle_graph(n) for n in range(3, cfg.n_max + 1)],
    }
    for name, graphs in families.items():
        by_delta = defaultdict(list)
        for g in graphs:
            rep = sandwich_check(g)
            by_delta[rep.delta].append(rep.max_gap)
        for delta, gaps in sorted(by_delta.items()):
            yield name, delta, len(gaps), max(gaps), 6 * delta + 2


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, v in asdict(GapConfig()).items():
        p.add_argument(f"--{f.replace('_', '-')}", type=type(v), default=v)
    cfg = GapConfig(**vars(p.parse_args()))
    print(f"{'family':<11} {'Delta':>5} {'graphs':>6} {'max gap':>7} {'6D+2':>5} {'ratio':>6}")
    for name, delta, k, gap, bound in rows(cfg):
        print(f"{name:<11} {delta:>5} {k:>6} {gap:>7} {bound:>5} {gap / bound:>6.2f}")


if __name__ == "__main__":
    main()
