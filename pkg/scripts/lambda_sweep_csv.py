"""Trace the Lagrangian trade-off on a log grid and write it as CSV.

Besides the solver output each row carries the two endpoints it should
approach: the deficiency (large multiplier, kl column) and the
joint-distribution unique information (small multiplier, cmi column).
"""
import argparse
import csv
import sys

from pidkit import fixtures
from pidkit.broja import tilde_ui
from pidkit.cli import parse_input
from pidkit.config import SolverConfig
from pidkit.delta import deficiency
from pidkit.lagrangian import lambda_sweep, log_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", choices=sorted(fixtures.CANONICAL))
    src.add_argument("--input")
    ap.add_argument("--direction", default="X", choices=["X", "Y"])
    ap.add_argument("--lo", type=float, default=1e-3)
    ap.add_argument("--hi", type=float, default=1e3)
    ap.add_argument("--steps", type=int, default=25)
    ap.add_argument("--restarts", type=int, default=16)
    ap.add_argument("--out", default="-")
    args = ap.parse_args()

    dist = fixtures.CANONICAL[args.fixture]() if args.fixture else parse_input(args.input)
    cfg = SolverConfig(restarts=args.restarts)
    rows = lambda_sweep(dist, args.direction, log_grid(args.lo, args.hi, args.steps), cfg)
    d = deficiency(dist, args.direction, cfg).value.bits
    ui = tilde_ui(dist, args.direction, cfg).value.bits

    out = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(out)
    w.writerow(["lambda", "total_bits", "kl_bits", "cmi_bits", "converged", "deficiency_bits", "tilde_ui_bits"])
    for r in rows:
        w.writerow([f"{r.lam:.6g}", f"{r.total.bits:.10f}", f"{r.kl_part.bits:.10f}", f"{r.cmi_part.bits:.10f}",
                    int(r.converged), f"{d:.10f}", f"{ui:.10f}"])
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
