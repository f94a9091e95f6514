"""Search random quasi-trees for graphs whose plain path metric d is not CND,
while the separation semimetric d_a still is.

    python scripts/plain_distance_cnd.py --count 200 --n-max 24 --seed 0
"""
import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from qtk.corpus import random_quasi_trees
from qtk.kernels import cnd_check
from qtk.separation import build_table


@dataclass
class HuntConfig:
    count: int = 200
    n_max: int = 24
    seed: int = 0
    tol: float = 1e-9


def hunt(cfg: HuntConfig) -> dict:
    found = []
    for i, g in enumerate(random_quasi_trees(cfg.count, cfg.n_max, cfg.seed)):
        plain = cnd_check(g.distances, cfg.tol)
        if plain.psd:
            continue
        da_ok = all(cnd_check(build_table(g, a).da, cfg.tol).psd for a in range(g.n))
        found.append({"index": i, "n": g.n, "edges": [list(e) for e in g.edges],
                      "plain_min_eigenvalue": plain.min_eigenvalue, "d_a_cnd_all_basepoints": da_ok})
    return {"config": asdict(cfg), "searched": cfg.count, "non_cnd_plain_metrics": len(found),
            "d_a_always_cnd": all(f["d_a_cnd_all_basepoints"] for f in found), "examples": found[:5]}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f, v in asdict(HuntConfig()).items():
        p.add_argument(f"--{f.replace('_', '-')}", type=type(v), default=v)
    cfg = HuntConfig(**vars(p.parse_args()))
    print(json.dumps(hunt(cfg), indent=1, default=float))


if __name__ == "__main__":
    main()
