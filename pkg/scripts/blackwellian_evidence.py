"""Tabulate how often vanishing unique information coincides with Blackwell sufficiency.

Discrete: joint-distribution UI_X against the garbling LP (Y sufficient for X),
on an alternating corpus of garbled and Dirichlet triples.
Gaussian: extraction-based UI_X against the Lambda order, on nested and
generic linear-Gaussian models.
"""
import argparse

import numpy as np

from pidkit import fixtures
from pidkit.blackwell import lambda_matrices, psd_min_eig, sufficiency_discrete
from pidkit.broja import tilde_ui
from pidkit.config import SolverConfig
from pidkit.ipid import blackwellian_check_gaussian


def discrete(n, rng, cfg):
    rows = []
    for i in range(n):
        gen = fixtures.garbled_triple if i % 2 == 0 else fixtures.random_triple
        dist = gen(rng, (3, 3, 3))
        v = sufficiency_discrete(dist.channel("Y"), dist.channel("X"))
        ui = tilde_ui(dist, "X", cfg).value.bits
        rows.append((gen.__name__, ui, v.residual, v.sufficient, (ui <= 1e-5) == v.sufficient))
    return rows


def gaussian(n, rng, cfg):
    rows = []
    for i in range(n):
        dims = tuple(int(v) for v in rng.integers(1, 4, size=3))
        gen = fixtures.nested_gaussian if i % 2 == 0 else fixtures.random_gaussian
        g = gen(rng, dims)
        lam = lambda_matrices(g)
        r = blackwellian_check_gaussian(g, cfg)
        rows.append((gen.__name__, dims, r.ui_x_bits, psd_min_eig(lam.lambda_y - lam.lambda_x), r.y_sufficient,
                     r.agree_x))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    cfg = SolverConfig()

    d = discrete(args.n, rng, cfg)
    print("discrete: generator, UI_X bits, LP residual, Y>=X, agree")
    for row in d:
        print(f"  {row[0]:15s} {row[1]:11.3e} {row[2]:11.3e} {row[3]!s:5} {row[4]}")
    print(f"discrete agreement {sum(r[-1] for r in d)}/{len(d)}")

    g = gaussian(args.n, rng, cfg)
    print("gaussian: generator, dims, UI_X bits, min eig(Ly - Lx), Y>=X, agree")
    for row in g:
        print(f"  {row[0]:15s} {str(row[1]):9s} {row[2]:11.3e} {row[3]:11.3e} {row[4]!s:5} {row[5]}")
    print(f"gaussian agreement {sum(r[-1] for r in g)}/{len(g)}")


if __name__ == "__main__":
    main()
