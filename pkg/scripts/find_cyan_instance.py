"""Search random 2x3x3 triples for one with a visible cyan region and store it.

The first seed (from --start) whose delta-PID cyan value exceeds --threshold
bits is written to data/cyan_2x3x3.json together with the seed, so the
instance can be regenerated with ``fixtures.random_triple``.
"""
import argparse
import json
import os

import numpy as np

from pidkit import fixtures
from pidkit.cli import document_for
from pidkit.config import SolverConfig
from pidkit.delta import delta_pid

HERE = os.path.dirname(os.path.abspath(__file__))


def search(start, tries, threshold, alpha, cfg):
    for seed in range(start, start + tries):
        dist = fixtures.random_triple(np.random.default_rng(seed), (2, 3, 3), alpha)
        atoms, cyan = delta_pid(dist, cfg)
        value = max(cyan.cyan_x.bits, cyan.cyan_y.bits)
        if value > threshold:
            return seed, dist, atoms, cyan
    return None


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--tries", type=int, default=500)
    ap.add_argument("--threshold", type=float, default=0.01)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--out", default=os.path.join(HERE, "..", "data", "cyan_2x3x3.json"))
    args = ap.parse_args()
    found = search(args.start, args.tries, args.threshold, args.alpha, SolverConfig(threads=1))
    if found is None:
        raise SystemExit(f"no instance above {args.threshold} bits in {args.tries} seeds")
    seed, dist, atoms, cyan = found
    doc = document_for(dist)
    doc["provenance"] = {
        "generator": "fixtures.random_triple",
        "seed": seed,
        "sizes": [2, 3, 3],
        "alpha": args.alpha,
        "cyan_x_bits": cyan.cyan_x.bits,
        "cyan_y_bits": cyan.cyan_y.bits,
        "loose_side": cyan.loose,
        "atoms_bits": atoms.as_dict(),
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
    print(f"seed {seed}: cyan_x={cyan.cyan_x.bits:.6f} cyan_y={cyan.cyan_y.bits:.6f} bits -> {args.out}")


if __name__ == "__main__":
    main()
