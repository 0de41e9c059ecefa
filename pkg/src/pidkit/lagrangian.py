"""Lagrangian family between the deficiency and the joint-distribution PID.

For a channel ``W = P[X'|M,Y]`` the objective is

    E_M D( P[X|M] || sum_y W(.|m,y) P(y|m) )  +  lam * I(M; X' | Y),

minimised over W. At ``lam -> inf`` the penalty forces X' to depend on Y
only and the KL term becomes the deficiency; at ``lam -> 0`` the optimal W
reproduces P[X|M] while keeping the conditional mutual information as small
as possible, which is the joint-distribution unique information.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ._parallel import pmap
from .atoms import PidAtoms
from .broja import tilde_ui
from .config import SolverConfig
from .delta import CyanReport, _KLObjective, deficiency, minimize_columns, symmetrized_atoms
from .newton import minimize_barrier
from .prob import LN2, ZERO, Channel, DiscreteTriple, InfoValue, InvalidArgument

MONOTONE_TOL = 1e-6
START_MIX = 1e-6


@dataclass(frozen=True)
class LambdaResult:
    lam: float
    total: InfoValue
    kl_part: InfoValue
    cmi_part: InfoValue
    optimizer: Channel  # X' | (M, Y), input index m * kY + y
    converged: bool
    restarts_used: int
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)


class _Problem:
    """Objective over column-stochastic ``K[x, r]`` with one column per live (m, y)."""

    def __init__(self, dist: DiscreteTriple, lam: float):
        p = dist.pmf
        self.kM, self.kX, self.kY = p.shape
        pmy = p.sum(axis=1)
        self.pmy_table = pmy
        pm = pmy.sum(axis=1)
        self.rows = [(m, y) for m in range(self.kM) for y in range(self.kY) if pmy[m, y] > ZERO]
        n = len(self.rows)
        self.rm = np.array([m for m, _ in self.rows])
        self.ry = np.array([y for _, y in self.rows])
        self.w = pmy[self.rm, self.ry]
        # source[r, m] = p(y_r | m) on the row's own message
        source = np.zeros((n, self.kM))
        live_m = pm > ZERO
        source[np.arange(n), self.rm] = self.w / np.where(live_m, pm, 1.0)[self.rm]
        target = dist.channel("X", "M").kernel
        self.kl = _KLObjective(pm, target, source)
        self.target = target
        self.Y = np.zeros((n, self.kY))
        self.Y[np.arange(n), self.ry] = 1.0
        self.py = self.w @ self.Y
        self.lam = float(lam)
        self.col_weight = self.w

    def _bar(self, K):
        q = K * self.w
        return (q @ self.Y) / np.maximum(self.py, 1e-300)  # W-bar[x, y]

    def cmi(self, K) -> float:
        bar = self._bar(K)[:, self.ry]
        q = K * self.w
        pos = q > 0
        return float(np.sum(q[pos] * np.log(K[pos] / bar[pos])))

    def value(self, K) -> float:
        v = self.kl.value(K)
        if self.lam and math.isfinite(v):
            v += self.lam * self.cmi(K)
        return v

    def grad(self, K):
        g = self.kl.grad(K)
        if self.lam:
            bar = self._bar(K)[:, self.ry]
            ratio = np.log(np.maximum(K, 1e-300)) - np.log(np.maximum(bar, 1e-300))
            g = g + self.lam * self.w * ratio
        return g

    def hess_blocks(self, K):
        """Hessian, block-diagonal over x; block ``x`` is an (n, n) matrix over rows."""
        blocks = self.kl.hess_blocks(K)
        if self.lam:
            bar = self._bar(K)
            same = self.Y @ self.Y.T
            n = len(self.w)
            for x in range(self.kX):
                inv = np.divide(1.0, self.py * bar[x], out=np.zeros(self.kY), where=bar[x] > 0)
                B = np.diag(self.w / np.maximum(K[x], 1e-300)) - same * np.outer(self.w, self.w) * inv[self.ry][:, None]
                blocks[x] += self.lam * B
        return blocks

    def parts(self, K):
        return self.kl.value(K), self.cmi(K)

    # starting points -------------------------------------------------------

    def copy_start(self):
        """``W(.|m, y) = P[X|M=m]``, optimal at lam = 0."""
        return self.target[:, self.rm].copy()

    def lift_garbling(self, kernel):
        """``W(.|m, y) = K(.|y)`` for a garbling ``K = P[X'|Y]``."""
        return np.asarray(kernel)[:, self.ry].copy()

    def lift_coupling(self, q):
        """``W(x|m, y) = Q(m, x, y) / P(m, y)`` for a coupling in the marginal polytope."""
        W = q[self.rm, :, self.ry].T / self.w
        return W / W.sum(axis=0, keepdims=True)

    def to_channel(self, K) -> Channel:
        full = np.full((self.kX, self.kM * self.kY), 1.0 / self.kX)
        full[:, self.rm * self.kY + self.ry] = K
        dead = sorted(set(range(self.kM * self.kY)) - set((self.rm * self.kY + self.ry).tolist()))
        return Channel(full, tuple(dead))

    def from_channel(self, ch: Channel):
        return np.asarray(ch.kernel)[:, self.rm * self.kY + self.ry].copy()


def _interior(K, mix: float = START_MIX):
    K = (1 - mix) * K + mix / K.shape[0]
    return K / K.sum(axis=0, keepdims=True)


def _work(dist: DiscreteTriple, direction: str) -> DiscreteTriple:
    d = direction.upper()
    if d not in ("X", "Y"):
        raise InvalidArgument(f"direction must be 'X' or 'Y', got {direction!r}")
    return dist if d == "X" else dist.swap_xy()


def reference_points(dist: DiscreteTriple, direction: str = "X", cfg: SolverConfig = SolverConfig()) -> dict:
    """Feasible channels from the two endpoint solvers, lifted to ``P[X'|M,Y]``."""
    work = _work(dist, direction)
    prob = _Problem(work, 0.0)
    dres = deficiency(work, "X", cfg)
    bres = tilde_ui(work, "X", cfg)
    return {
        "delta": prob.lift_garbling(dres.optimizer.kernel),
        "delta_value": dres.value.nats,
        "broja": prob.lift_coupling(bres.point.q),
        "broja_value": bres.value.nats,
    }


def delta_lambda(dist: DiscreteTriple, direction: str = "X", lam: float = 1.0,
                 cfg: SolverConfig = SolverConfig(), warm: Optional[Channel] = None,
                 refs: Optional[dict] = None) -> LambdaResult:
    """Minimise the Lagrangian objective from several starts and keep the best.

    Starts: the warm channel (if any), the copy channel, the lifted deficiency
    garbling and the lifted joint-distribution optimizer, then
    ``cfg.restarts`` Dirichlet-random interior channels.
    """
    if not lam >= 0 or not math.isfinite(lam):
        raise InvalidArgument(f"lambda must be finite and >= 0, got {lam}")
    work = _work(dist, direction)
    prob = _Problem(work, lam)
    if lam == 0:
        K = prob.copy_start()
        kl, cmi = prob.parts(K)
        return LambdaResult(0.0, InfoValue(0.0), InfoValue(max(kl, 0.0)), InfoValue(cmi),
                            prob.to_channel(K), True, 0, {"closed_form": True})
    if refs is None:
        refs = reference_points(dist, direction, cfg)
    starts = []
    if warm is not None:
        starts.append(("warm", _interior(prob.from_channel(warm))))
    starts += [
        ("copy", _interior(prob.copy_start())),
        ("delta", _interior(refs["delta"])),
        ("broja", _interior(refs["broja"])),
    ]
    rng = np.random.default_rng([cfg.seed, int(np.float64(lam).view(np.uint64))])
    n = len(prob.rows)
    for i in range(cfg.restarts):
        starts.append((f"random{i}", rng.dirichlet(np.ones(prob.kX), size=n).T))

    def run(item):
        name, K0 = item
        K, f, it, conv, gap = minimize_barrier(prob, K0, cfg)
        return name, K, f, it, conv, gap

    runs = pmap(run, starts, cfg.n_threads())
    best = min(runs, key=lambda r: r[2])
    name, K, f, it, conv, gap = best
    kl, cmi = prob.parts(K)
    # certified upper bounds from the two endpoint points
    kl_b, cmi_b = _Problem(work, 0.0).parts(refs["broja"])
    kl_d, cmi_d = _Problem(work, 0.0).parts(refs["delta"])
    ub = min(kl_b + lam * refs["broja_value"], refs["delta_value"] + lam * cmi_d)
    diag = {
        "restart_values_bits": {r[0]: r[2] / LN2 for r in runs},
        "best_start": name,
        "iterations": it,
        "gap_bits": gap / LN2,
        "upper_bound_bits": ub / LN2,
        "upper_bound_ok": f <= ub + 1e-9 * LN2,
        "converged_runs": int(sum(r[4] for r in runs)),
    }
    return LambdaResult(float(lam), InfoValue(f), InfoValue(max(kl, 0.0) if kl > -1e-12 else kl),
                        InfoValue(max(cmi, 0.0) if cmi > -1e-12 else cmi), prob.to_channel(K),
                        any(r[4] for r in runs), len(starts), diag)


def check_grid(grid: Sequence[float]) -> List[float]:
    g = [float(v) for v in grid]
    if not g:
        raise InvalidArgument("grid must be non-empty")
    if any(not (v >= 0) or not math.isfinite(v) for v in g):
        raise InvalidArgument("grid values must be finite and >= 0")
    if any(b <= a for a, b in zip(g, g[1:])):
        raise InvalidArgument("grid must be strictly increasing")
    return g


def log_grid(lo: float, hi: float, n: int) -> List[float]:
    return [float(v) for v in np.logspace(math.log10(lo), math.log10(hi), n)]


def lambda_sweep(dist: DiscreteTriple, direction: str = "X", grid: Sequence[float] = (0.0,),
                 cfg: SolverConfig = SolverConfig(), warm_start: bool = True,
                 max_repairs: int = 3) -> List[LambdaResult]:
    """Solve along an increasing grid of multipliers.

    The optimum is non-decreasing in ``lam``; a drop beyond 1e-6 bits means
    the earlier point stopped at a poor solution, so it is re-solved warm-started
    from the later optimizer (feasible there) with twice the restarts.
    """
    grid = check_grid(grid)
    refs = reference_points(dist, direction, cfg) if any(v > 0 for v in grid) else None
    out: List[LambdaResult] = []
    prev = None
    for lam in grid:
        r = delta_lambda(dist, direction, lam, cfg, warm=prev.optimizer if (warm_start and prev) else None,
                         refs=refs)
        out.append(r)
        prev = r
    repairs = 0
    for _ in range(max_repairs):
        bad = [k for k in range(1, len(out)) if out[k].total.bits < out[k - 1].total.bits - MONOTONE_TOL]
        if not bad:
            break
        for k in reversed(bad):
            esc = cfg.with_(restarts=2 * cfg.restarts)
            out[k - 1] = delta_lambda(dist, direction, grid[k - 1], esc, warm=out[k].optimizer, refs=refs)
            out[k - 1].diagnostics["repaired"] = True
            repairs += 1
    for r in out:
        r.diagnostics["sweep_repairs"] = repairs
    return out


def lambda_pid(dist: DiscreteTriple, lam: float, cfg: SolverConfig = SolverConfig()):
    """Min-symmetrised atoms with the Lagrangian value in place of the deficiency."""
    rx, ry = (delta_lambda(dist, d, lam, cfg) for d in ("X", "Y"))
    diag = {
        "lambda": lam,
        "converged": rx.converged and ry.converged,
        "deficiency_x_bits": rx.total.bits,
        "deficiency_y_bits": ry.total.bits,
        "deficiency_x_nats": rx.total.nats,
        "deficiency_y_nats": ry.total.nats,
        "kl_bits": [rx.kl_part.bits, ry.kl_part.bits],
        "cmi_bits": [rx.cmi_part.bits, ry.cmi_part.bits],
    }
    atoms, cyan = symmetrized_atoms(dist, rx.total, ry.total, f"lambda({lam:g})", diag)
    atoms.diagnostics.update(cyan_x_bits=cyan.cyan_x.bits, cyan_y_bits=cyan.cyan_y.bits, loose_side=cyan.loose)
    return atoms, cyan
