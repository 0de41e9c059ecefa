"""Weighted-output deficiency and the deficiency-based PID.

The deficiency of Y with respect to X about M is

    min over kernels K = P[X'|Y] of  E_M D( P[X|M] || K o P[Y|M] ),

a convex program over a product of simplices (one per symbol of Y). It is
solved by mirror descent (exponentiated gradient) with a backtracking step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ._parallel import pmap
from .atoms import PidAtoms, assemble_from_ri, mutual_informations
from .config import SolverConfig
from .newton import minimize_barrier
from .prob import LN2, ZERO, Channel, DiscreteTriple, InfoValue, InvalidArgument

CYAN_TOL = 1e-7
MD_BUDGET = 2000  # mirror-descent iterations before the Newton polish


@dataclass(frozen=True)
class DeficiencyResult:
    value: InfoValue
    optimizer: Channel
    iterations: int
    converged: bool
    gap: float = math.inf  # certified bound (bits) on value - optimum
    history: Optional[List[float]] = field(default=None, compare=False, repr=False)
    newton_steps: int = 0


@dataclass(frozen=True)
class CyanReport:
    cyan_x: InfoValue
    cyan_y: InfoValue
    loose: str  # "X", "Y" or "neither"


def _direction_channels(dist: DiscreteTriple, direction: str):
    d = direction.upper()
    if d not in ("X", "Y"):
        raise InvalidArgument(f"direction must be 'X' (X without Y) or 'Y', got {direction!r}")
    src = "Y" if d == "X" else "X"
    return dist.p_m, dist.channel(d, "M").kernel, dist.channel(src, "M").kernel


class _KLObjective:
    """``F(K) = sum_m p(m) KL(target(.|m) || (K source)(.|m))`` in nats."""

    def __init__(self, pm, target, source):
        live = pm > ZERO
        self.pm = pm[live]
        self.target = target[:, live]
        self.source = source[:, live]
        self.wt = self.target * self.pm  # p(m) p(x|m)
        tpos = self.target > ZERO
        self.const = float(np.sum(self.wt[tpos] * np.log(self.target[tpos])))
        self.col_weight = np.maximum(self.source @ self.pm, 1e-300)  # p(y)

    def value(self, K):
        R = K @ self.source
        pos = self.wt > 0
        if np.any(R[pos] <= 0):
            return math.inf
        return self.const - float(np.sum(self.wt[pos] * np.log(R[pos])))

    def grad(self, K):
        R = K @ self.source
        ratio = np.divide(self.wt, R, out=np.zeros_like(R), where=self.wt > 0)
        return -(ratio @ self.source.T)

    def hess_blocks(self, K):
        """Block ``x`` of the Hessian: ``sum_m wt[x, m] / R[x, m]^2 s_m s_m^T``."""
        R = K @ self.source
        scale = np.divide(self.wt, R ** 2, out=np.zeros_like(R), where=self.wt > 0)
        return np.einsum("ym,xm,zm->xyz", self.source, scale, self.source)


def minimize_columns(obj, K0: np.ndarray, cfg: SolverConfig, record: bool = False):
    """Mirror descent on column-stochastic ``K`` for a smooth convex objective.

    Each column lives on a simplex; steps are ``K_y <- K_y exp(-eta g_y / w_y)``
    normalised, with ``w_y`` the column weight. ``eta`` is backtracked until
    the Bregman upper model holds, which makes every step a descent step.
    Returns (K, value_nats, iterations, converged, gap_nats, history).
    """
    K = K0.copy()
    w = obj.col_weight
    f = obj.value(K)
    history = [f] if record else None
    window = [f]
    eta = 1.0
    tol_nats = cfg.tol * LN2
    converged = False
    gap = math.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        g = obj.grad(K)
        gap = float(np.sum(g * K) - np.sum(g.min(axis=0)))
        if gap <= tol_nats:
            converged = True
            it -= 1
            break
        gs = g / w
        logK = np.log(np.maximum(K, 1e-300))
        while True:
            z = logK - eta * gs
            z -= z.max(axis=0, keepdims=True)
            Kn = np.exp(z)
            Kn /= Kn.sum(axis=0, keepdims=True)
            fn = obj.value(Kn)
            kl = np.sum(w * np.sum(np.where(Kn > 0, Kn * (np.log(np.maximum(Kn, 1e-300)) - logK), 0.0), axis=0))
            model = f + float(np.sum(g * (Kn - K))) + kl / eta
            if fn <= model + 1e-15 * max(1.0, abs(f)) or eta < 1e-12:
                break
            eta *= 0.5
        if fn > f:
            # no progress possible at this resolution
            converged = abs(fn - f) <= tol_nats
            break
        K, f = Kn, fn
        eta = min(eta * 2.0, 1e6)
        if record:
            history.append(f)
        window.append(f)
        if len(window) > cfg.window:
            old = window.pop(0)
            if abs(old - f) <= tol_nats * max(1.0, abs(f)):
                converged = True
                break
    g = obj.grad(K)
    gap = float(np.sum(g * K) - np.sum(g.min(axis=0)))
    return K, f, it, converged, gap, history


def deficiency(dist: DiscreteTriple, direction: str = "X", cfg: SolverConfig = SolverConfig(),
               start: str = "uniform", record: bool = False) -> DeficiencyResult:
    """``delta(M : X \\ Y)`` for direction "X", ``delta(M : Y \\ X)`` for "Y"."""
    pm, target, source = _direction_channels(dist, direction)
    obj = _KLObjective(pm, target, source)
    kT, kS = target.shape[0], source.shape[0]
    if start == "uniform":
        K0 = np.full((kT, kS), 1.0 / kT)
    elif start == "random":
        rng = np.random.default_rng(cfg.seed)
        K0 = rng.dirichlet(np.ones(kT), size=kS).T
    else:
        raise InvalidArgument(f"unknown start {start!r}")
    tol = cfg.tol * LN2
    K, f, it, conv, gap, hist = minimize_columns(obj, K0, cfg.with_(max_iter=min(cfg.max_iter, MD_BUDGET)), record)
    steps = 0
    if gap > tol:
        # optimum on the boundary: mirror descent slows to a sublinear crawl there
        Kb, fb, steps, ok, gb = minimize_barrier(obj, (1 - 1e-6) * K + 1e-6 / kT, cfg)
        if fb <= f + 1e-12 and gb < gap:
            K, f, gap = Kb, fb, gb
        if gap > tol and cfg.max_iter > it:
            K, f, more, _, gap, extra = minimize_columns(obj, K, cfg.with_(max_iter=cfg.max_iter - it), record)
            it += more
            if record:
                hist += extra[1:]
    conv = gap <= tol or conv
    return DeficiencyResult(
        InfoValue(max(f, 0.0) if f > -1e-12 else f), Channel(K), it, conv, gap / LN2,
        [h / LN2 for h in hist] if hist is not None else None, steps,
    )


def cyan_from(i_mx: InfoValue, i_my: InfoValue, d_x: InfoValue, d_y: InfoValue) -> CyanReport:
    a = (i_mx - d_x).nats
    b = (i_my - d_y).nats
    cx = InfoValue(max(a - b, 0.0))
    cy = InfoValue(max(b - a, 0.0))
    loose = "X" if cx.bits > CYAN_TOL else "Y" if cy.bits > CYAN_TOL else "neither"
    return CyanReport(cx, cy, loose)


def symmetrized_atoms(dist, d_x: InfoValue, d_y: InfoValue, method: str, diagnostics: dict):
    """Atoms from two directional deficiencies via min-symmetrised redundancy."""
    i_mxy, i_mx, i_my = mutual_informations(dist)
    ri = InfoValue(min((i_mx - d_x).nats, (i_my - d_y).nats))
    atoms = assemble_from_ri(i_mxy, i_mx, i_my, ri, method, diagnostics)
    return atoms, cyan_from(i_mx, i_my, d_x, d_y)


def delta_pid(dist: DiscreteTriple, cfg: SolverConfig = SolverConfig()) -> Tuple[PidAtoms, CyanReport]:
    rx, ry = pmap(lambda d: deficiency(dist, d, cfg), ("X", "Y"), cfg.n_threads())
    diag = {
        "converged": rx.converged and ry.converged,
        "deficiency_x_bits": rx.value.bits,
        "deficiency_y_bits": ry.value.bits,
        "deficiency_x_nats": rx.value.nats,
        "deficiency_y_nats": ry.value.nats,
        "iterations": [rx.iterations, ry.iterations],
        "gaps_bits": [rx.gap, ry.gap],
    }
    atoms, cyan = symmetrized_atoms(dist, rx.value, ry.value, "delta", diag)
    atoms.diagnostics.update(cyan_x_bits=cyan.cyan_x.bits, cyan_y_bits=cyan.cyan_y.bits, loose_side=cyan.loose)
    return atoms, cyan


def cyan_region(dist: DiscreteTriple, cfg: SolverConfig = SolverConfig()) -> CyanReport:
    return delta_pid(dist, cfg)[1]
