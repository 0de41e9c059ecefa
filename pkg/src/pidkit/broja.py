"""Unique information as the minimum conditional mutual information over the
set of joints that share the (M,X) and (M,Y) marginals of P.

For each message m the feasible slice is a transportation polytope with row
sums P(x|m) and column sums P(y|m), so the linear minimisation oracle of a
Frank-Wolfe method is a set of small transportation LPs. We run pairwise
(away-to-toward) Frank-Wolfe steps block by block, with an exact line search
on the convex one-dimensional slice, and certify the result with the
Frank-Wolfe duality gap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from ._parallel import pmap
from .atoms import PidAtoms, assemble_from_ri, mutual_informations
from .config import SolverConfig
from .lp import transport_vertex
from .prob import (
    LN2, ZERO, DiscreteTriple, InfoValue, InvalidArgument, cond_mi_table,
    interaction_information_table, mutual_information,
)

_LOG_FLOOR = 1e-300


@dataclass(frozen=True, eq=False)
class DeltaPPoint:
    """A joint ``q[m, x, y]`` with the (M,X) and (M,Y) marginals of a reference pmf."""

    q: np.ndarray

    def marginal_violation(self, dist: DiscreteTriple) -> float:
        p = dist.pmf
        return float(max(
            np.abs(self.q.sum(axis=2) - p.sum(axis=2)).max(),
            np.abs(self.q.sum(axis=1) - p.sum(axis=1)).max(),
        ))


@dataclass(frozen=True)
class TildeUIResult:
    value: InfoValue
    point: DeltaPPoint
    converged: bool
    gap: float  # bits; value - gap is a certified lower bound
    iterations: int
    diagnostics: Dict = field(default_factory=dict, compare=False)

    def __iter__(self):
        return iter((self.value, self.point))


@dataclass
class _Block:
    m: int
    weight: float  # p(m)
    rows: np.ndarray
    cols: np.ndarray
    a: np.ndarray
    b: np.ndarray
    atoms: List[Tuple[float, np.ndarray]]  # (convex weight, coupling)


def _grad(Q: np.ndarray) -> np.ndarray:
    """d I(M;X|Y) / dQ up to terms constant on each transportation slice."""
    qxy = Q.sum(axis=0)
    return np.log(np.maximum(Q, _LOG_FLOOR)) - np.log(np.maximum(qxy, _LOG_FLOOR))[None]


def _line_search(q_blk: np.ndarray, qxy_blk: np.ndarray, d: np.ndarray, gmax: float) -> float:
    """Minimiser over [0, gmax] of f(Q + g d) with d supported on one block."""
    nz = d != 0
    qb, qx, dd = q_blk[nz], qxy_blk[nz], d[nz]

    def dphi(g):
        a = qb + g * dd
        c = qx + g * dd
        if np.any(a <= 0) or np.any(c <= 0):
            # only at an endpoint: mass vanishing where d < 0 pulls derivative to +inf
            la = np.log(np.maximum(a, _LOG_FLOOR))
            lc = np.log(np.maximum(c, _LOG_FLOOR))
            return float(np.sum(dd * (la - lc))), math.inf
        return float(np.sum(dd * (np.log(a) - np.log(c)))), float(np.sum(dd * dd / a) - np.sum(dd * dd / c))

    d_hi, _ = dphi(gmax)
    if d_hi <= 0:
        return gmax
    lo, hi = 0.0, gmax
    g = 0.5 * gmax
    for _ in range(100):
        d1, d2 = dphi(g)
        if d1 > 0:
            hi = g
        else:
            lo = g
        if abs(d1) < 1e-16 or hi - lo <= 1e-16 * max(gmax, 1e-300):
            break
        step = g - d1 / d2 if d2 > 0 and math.isfinite(d2) else None
        g = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
    return g


def _setup(dist: DiscreteTriple):
    p = dist.pmf
    pm = dist.p_m
    blocks = []
    Q = np.zeros_like(p)
    for m in np.flatnonzero(pm > ZERO):
        a_full = p[m].sum(axis=1) / pm[m]
        b_full = p[m].sum(axis=0) / pm[m]
        rows = np.flatnonzero(a_full > ZERO)
        cols = np.flatnonzero(b_full > ZERO)
        a = a_full[rows] / a_full[rows].sum()
        b = b_full[cols] / b_full[cols].sum()
        C = np.outer(a, b)
        Q[m][np.ix_(rows, cols)] = pm[m] * C
        blocks.append(_Block(int(m), float(pm[m]), rows, cols, a, b, [(1.0, C)]))
    return Q, blocks


def _block_oracle(blk: _Block, G: np.ndarray):
    Gm = G[blk.m][np.ix_(blk.rows, blk.cols)]
    S = transport_vertex(Gm, blk.a, blk.b)
    return Gm, S


_DUAL_MIX = (0.0, 1e-12, 1e-9, 1e-6, 1e-4, 1e-2, 1.0)
_VANISHING = (1e-12, 1e-10, 1e-8, 1e-6, 1e-4)


def _additive_fit(G, Q, blocks):
    """Per block, the weighted least-squares fit ``G[m, x, y] ~ alpha(x) + beta(y)``."""
    out = np.array(G, copy=True)
    for blk in blocks:
        ix = np.ix_(blk.rows, blk.cols)
        nr, nc = len(blk.rows), len(blk.cols)
        w = np.sqrt(Q[blk.m][ix].ravel() + 1e-300)
        D = np.zeros((nr * nc, nr + nc))
        for i in range(nr):
            for j in range(nc):
                D[i * nc + j, i] = 1.0
                D[i * nc + j, nr + j] = 1.0
        coef = np.linalg.lstsq(D * w[:, None], G[blk.m][ix].ravel() * w, rcond=None)[0]
        out[blk.m][ix] = (D @ coef).reshape(nr, nc)
    return out


def _exact_gap(Q, blocks) -> float:
    """Certified bound on ``f(Q) - min f`` from a dual point.

    On each (x, y) fiber the objective is ``phi(v) = sum_m v_m log(v_m / sum v)``,
    which dominates every linear form ``<g, v>`` with ``logsumexp(g) <= 0``.
    Any such ``g`` therefore gives the lower bound ``min_S <g, S>`` over the
    polytope, a transport LP per block. ``g = log q(m|x,y)`` is the usual
    Frank-Wolfe bound; mixing it with the uniform law keeps the bound finite
    when a fiber's mass is vanishing.
    """
    support = np.zeros(Q.shape, dtype=bool)
    for blk in blocks:
        support[blk.m][np.ix_(blk.rows, blk.cols)] = True
    k = np.maximum(support.sum(axis=0), 1)
    qxy = Q.sum(axis=0)
    cond = np.divide(Q, qxy[None], out=np.zeros_like(Q), where=qxy[None] > 0)
    cond = np.where(qxy[None] > 0, cond, 1.0 / k[None])
    # -H(M|XY); differs from I(M;X|Y) by a constant on the polytope
    pos = Q > 0
    f = float(np.sum(Q[pos] * np.log(cond[pos])))
    g0 = np.log(np.maximum(cond, _LOG_FLOOR))
    fitted = _additive_fit(g0, Q, blocks)
    lse = np.log(np.maximum(np.sum(np.where(support, np.exp(fitted), 0.0), axis=0), _LOG_FLOOR))
    best = math.inf
    trials = [(eps, -1.0) for eps in _DUAL_MIX] + [(0.0, tau) for tau in _VANISHING]
    for eps, tau in trials:
        g = np.log(np.maximum((1 - eps) * cond + eps / k[None], _LOG_FLOOR))
        if tau >= 0:
            # vanishing fibers take the potentials of the live part, shifted to lse = 0
            g = np.where((qxy <= tau)[None], fitted - lse[None], g)
        lb = 0.0
        for blk in blocks:
            ix = np.ix_(blk.rows, blk.cols)
            gm = g[blk.m][ix]
            if len(blk.rows) < 2 or len(blk.cols) < 2:
                lb += blk.weight * float(np.sum(gm * (Q[blk.m][ix] / blk.weight)))
                continue
            S = transport_vertex(gm, blk.a, blk.b)
            lb += blk.weight * float(np.sum(gm * S))
        best = min(best, f - lb)
    return max(best, 0.0)


def _fw_sweeps(Q, blocks, n_sweeps: int, tol: float):
    """Pairwise Frank-Wolfe sweeps over the blocks; returns (iterations, last sweep gap)."""
    it = 0
    sweep_gap = math.inf
    for _ in range(n_sweeps):
        sweep_gap = 0.0
        for blk in blocks:
            it += 1
            G = _grad(Q)
            Gm, S = _block_oracle(blk, G)
            ix = np.ix_(blk.rows, blk.cols)
            Cm = Q[blk.m][ix] / blk.weight
            sweep_gap += blk.weight * float(np.sum(Gm * (Cm - S)))
            k = int(np.argmax([float(np.sum(Gm * V)) for _, V in blk.atoms]))
            wv, V = blk.atoms[k]
            D = S - V
            if not np.any(D) or float(np.sum(Gm * D)) >= -1e-18:
                continue
            qxy = Q.sum(axis=0)
            g = _line_search(Q[blk.m][ix], qxy[ix], blk.weight * D, wv)
            if g <= 0:
                continue
            Qm = Q[blk.m]
            Qm[ix] = np.clip(Qm[ix] + g * blk.weight * D, 0.0, None)
            new_atoms = []
            placed = False
            for w, A in blk.atoms:
                if A is V:
                    w = w - g
                if not placed and np.array_equal(A, S):
                    w = w + g
                    placed = True
                if w > 1e-16:
                    new_atoms.append((w, A))
            if not placed:
                new_atoms.append((g, S))
            tot = sum(w for w, _ in new_atoms)
            blk.atoms = [(w / tot, A) for w, A in new_atoms]
        if sweep_gap <= tol:
            break
    return it, sweep_gap


def _constraint_rows(var, blocks):
    pos = {v: i for i, v in enumerate(var)}
    rows, rhs = [], []
    for blk in blocks:
        for i, x in enumerate(blk.rows):
            rows.append([pos[(blk.m, x, y)] for y in blk.cols if (blk.m, x, y) in pos])
            rhs.append(blk.weight * blk.a[i])
        for j, y in enumerate(blk.cols[:-1]):
            rows.append([pos[(blk.m, x, y)] for x in blk.rows if (blk.m, x, y) in pos])
            rhs.append(blk.weight * blk.b[j])
    A = np.zeros((len(rows), len(var)))
    for r, idx in enumerate(rows):
        A[r, idx] = 1.0
    return A, np.array(rhs)


def _barrier_solve(Q, blocks, mu0: float = 1e-2, mu_min: float = 1e-15, inner: int = 60):
    """Log-barrier Newton path for the equality-constrained problem.

    Minimises ``f(q) - mu sum log q`` on the support for a decreasing
    sequence of ``mu``. Newton steps are taken in affine-scaled coordinates
    ``d = diag(q) u``, where the barrier Hessian becomes ``mu I``. The
    iterate starts from (and stays close to) the central path, so entries that
    belong at zero shrink like ``mu`` while the others stay well inside.
    """
    shape = Q.shape
    var = [(blk.m, x, y) for blk in blocks for x in blk.rows for y in blk.cols]
    n = len(var)
    if n == 0:
        return Q, 0
    idx = tuple(np.array(var).T)
    xy = np.array([x * shape[2] + y for _, x, y in var])
    ufib, fiber = np.unique(xy, return_inverse=True)
    F = np.zeros((fiber.max() + 1, n))
    F[fiber, np.arange(n)] = 1.0
    # mass that blocks outside the solve put on the same fibers
    free = np.zeros(shape, dtype=bool)
    free[idx] = True
    fixed = np.where(free, 0.0, Q).sum(axis=0).ravel()[ufib]
    A, b = _constraint_rows(var, blocks)
    nc = A.shape[0]
    q = Q[idx].copy()

    def fval(q, mu):
        qf = F @ q + fixed
        return float(np.sum(q * np.log(q)) - np.sum(qf * np.log(qf)) - mu * np.sum(np.log(q)))

    steps = 0
    K = np.zeros((n + nc, n + nc))
    mu = mu0
    while True:
        f = fval(q, mu)
        for _ in range(inner):
            qf = F @ q + fixed
            g = np.log(q) - np.log(qf)[fiber] - mu / q
            Fq = F * q[None, :]
            K[:n, :n] = np.diag(q) - Fq.T @ (Fq / qf[:, None]) + mu * np.eye(n)
            Aq = A * q[None, :]
            K[n:, :n] = Aq
            K[:n, n:] = Aq.T
            r = b - A @ q
            rhs = np.concatenate([-q * g, r])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            u = sol[:n]
            d = q * u
            dec = -float(g @ d)
            # centred enough for this mu
            if dec <= 1e-2 * mu and np.abs(r).max() <= 1e-14:
                break
            t = min(1.0, 0.95 / float(-u.min())) if u.min() < 0 else 1.0
            if dec <= 1e-13:
                # below the resolution of f; local quadratic convergence takes over
                q = q + t * d
                f = fval(q, mu)
                steps += 1
                continue
            while t > 1e-12:
                qn = q + t * d
                fn = fval(qn, mu)
                if fn <= f - 1e-4 * t * max(dec, 0.0) + 1e-15 * max(1.0, abs(f)):
                    break
                t *= 0.5
            else:
                break
            q, f = qn, fn
            steps += 1
        if mu <= mu_min:
            break
        mu = max(mu * 0.1, mu_min)
    out = Q.copy()
    out[idx] = q
    return out, steps


def _solve(dist: DiscreteTriple, cfg: SolverConfig):
    Q, blocks = _setup(dist)
    active = [b for b in blocks if len(b.rows) > 1 and len(b.cols) > 1]
    if not active:
        return Q, 0, True, 0.0, {"newton_steps": 0, "fw_iterations": 0}
    tol = cfg.tol * LN2
    Q, newton_steps = _barrier_solve(Q, active)
    gap = _exact_gap(Q, blocks)
    it = 0
    n_sweeps = 10
    # the certificate should close after the barrier path; Frank-Wolfe is a fallback
    while gap > tol and it < cfg.max_iter:
        for blk in active:
            blk.atoms = [(1.0, Q[blk.m][np.ix_(blk.rows, blk.cols)] / blk.weight)]
        k, _ = _fw_sweeps(Q, active, n_sweeps, tol)
        it += k
        gap = _exact_gap(Q, blocks)
        n_sweeps *= 2
    return Q, it, gap <= tol, gap, {"newton_steps": newton_steps, "fw_iterations": it}


def tilde_ui(dist: DiscreteTriple, direction: str = "X", cfg: SolverConfig = SolverConfig()) -> TildeUIResult:
    """Minimum over the marginal-matching polytope of ``I(M;X|Y)`` (or ``I(M;Y|X)``)."""
    d = direction.upper()
    if d not in ("X", "Y"):
        raise InvalidArgument(f"direction must be 'X' or 'Y', got {direction!r}")
    work = dist if d == "X" else dist.swap_xy()
    Q, it, conv, gap, info = _solve(work, cfg)
    val = cond_mi_table(Q)
    if d == "Y":
        Q = np.transpose(Q, (0, 2, 1))
    val = max(val, 0.0) if val > -1e-12 else val
    return TildeUIResult(InfoValue(val), DeltaPPoint(Q), conv, gap / LN2, it, info)


def tilde_pid(dist: DiscreteTriple, cfg: SolverConfig = SolverConfig()) -> PidAtoms:
    res = tilde_ui(dist, "X", cfg)
    i_mxy, i_mx, i_my = mutual_informations(dist)
    ri = i_mx - res.value
    diag = {
        "converged": res.converged,
        "gap_bits": res.gap,
        "iterations": res.iterations,
        "ui_x_lower_bound_bits": res.value.bits - res.gap,
        "marginal_violation": res.point.marginal_violation(dist),
    }
    return assemble_from_ri(i_mxy, i_mx, i_my, ri, "broja", diag)


@dataclass(frozen=True)
class SymmetryReport:
    ri_from_x: float
    ri_from_y: float
    coinformation_q: float
    side_residual: float
    coinformation_residual: float
    converged: bool


def symmetry_check(dist: DiscreteTriple, cfg: SolverConfig = SolverConfig()) -> SymmetryReport:
    """Compare the redundancy computed from either side and the co-information of the optimiser."""
    rx, ry = pmap(lambda d: tilde_ui(dist, d, cfg), ("X", "Y"), cfg.n_threads())
    i_mx = mutual_information(dist, "M", "X").bits
    i_my = mutual_information(dist, "M", "Y").bits
    ri_x = i_mx - rx.value.bits
    ri_y = i_my - ry.value.bits
    co = interaction_information_table(rx.point.q) / LN2
    return SymmetryReport(ri_x, ri_y, co, abs(ri_x - ri_y), abs(ri_x - co), rx.converged and ry.converged)


def tilde_ui_channel_form(dist: DiscreteTriple, direction: str = "X") -> InfoValue:
    """Same quantity via the channel parametrisation ``P[X'|M,Y]``, solved as an exponential-cone program.

    Minimises ``I(M;X'|Y)`` subject to ``sum_y P[X'|M,Y] P[Y|M] = P[X|M]``.
    Serves as an independent cross-check of :func:`tilde_ui`; needs cvxpy.
    """
    import cvxpy as cp

    d = direction.upper()
    work = dist if d == "X" else dist.swap_xy()
    p = work.pmf
    kM, kX, kY = p.shape
    pmy = p.sum(axis=1)
    pm = pmy.sum(axis=1)
    py = pmy.sum(axis=0)
    live = [(m, y) for m in range(kM) for y in range(kY) if pmy[m, y] > ZERO]
    W = cp.Variable((len(live), kX), nonneg=True)
    index = {my: i for i, my in enumerate(live)}
    cons = [cp.sum(W, axis=1) == 1]
    for m in range(kM):
        if pm[m] <= ZERO:
            continue
        rows = [index[(m, y)] for y in range(kY) if (m, y) in index]
        wts = np.array([pmy[m, y] / pm[m] for y in range(kY) if (m, y) in index])
        cons.append(wts @ W[rows, :] == p[m].sum(axis=1) / pm[m])
    terms = []
    for y in range(kY):
        rows = [index[(m, y)] for m in range(kM) if (m, y) in index]
        if not rows:
            continue
        wm = np.array([pmy[m, y] for m in range(kM) if (m, y) in index])
        bar = (wm / py[y]) @ W[rows, :]
        for r, w in zip(rows, wm):
            terms.append(cp.sum(cp.rel_entr(w * W[r, :], w * bar)))
    prob = cp.Problem(cp.Minimize(cp.sum(cp.hstack(terms))), cons)
    prob.solve(solver="CLARABEL")
    return InfoValue(max(float(prob.value), 0.0))
