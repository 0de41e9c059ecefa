"""Information deficiency and the extraction-based PID.

The information deficiency of Y with respect to X is

    sup over extraction channels P[T|M] of  I(T;X) - I(T;Y),

with T generated from M alone. For discrete M the objective is a sum over
t of a 1-homogeneous function of the vector ``P(t|m) p(m)``, so by
Caratheodory ``|T| = kM`` extractors already attain the supremum. For
Gaussian models with ``T = H M' + N(0, I)`` (M' whitened) the gain has the
closed form

    0.5 [logdet(I+Lx) - logdet(I+Ly)] - 0.5 [logdet(I+P+Lx) - logdet(I+P+Ly)],

``P = H^T H``, whose supremum is approached as P grows along the subspace
where ``I+Lx`` dominates ``I+Ly``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from ._parallel import pmap
from .atoms import PidAtoms, mutual_informations
from .blackwell import PSD_TOL, lambda_matrices, psd_min_eig, sufficiency_gaussian
from .config import SolverConfig
from .delta import CyanReport, symmetrized_atoms
from .prob import (
    LN2,
    ZERO,
    Channel,
    DiscreteTriple,
    GaussianTriple,
    InfoValue,
    InvalidArgument,
    extend_with_extractor,
    gaussian_mi_cov,
    mutual_information,
)

BOUND_SLACK = 1e-6
UI_POSITIVE = 1e-4
_LOG_FLOOR = 1e-300


class BoundViolation(RuntimeError):
    """An I-PID atom broke one of its proved bounds: the optimizer under-performed."""

    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ExtractionChannel:
    discrete: Optional[Channel] = None
    gaussian: Optional[np.ndarray] = None  # H acting on the whitened message; noise covariance I


@dataclass(frozen=True)
class IDeficiencyResult:
    value: InfoValue
    extractor: ExtractionChannel
    certified_lower_bound: bool
    converged: bool = True
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)


def _direction(direction: str) -> str:
    d = direction.upper()
    if d not in ("X", "Y"):
        raise InvalidArgument(f"direction must be 'X' or 'Y', got {direction!r}")
    return d


# ---------------------------------------------------------------------------
# discrete


class _Gain:
    """``I(T;X) - I(T;Y)`` for batches of extractors ``P[r, t, m]``."""

    def __init__(self, dist: DiscreteTriple, direction: str):
        work = dist if _direction(direction) == "X" else dist.swap_xy()
        p = work.pmf
        self.pmx = p.sum(axis=2)  # (m, x)
        self.pmy = p.sum(axis=1)  # (m, y)
        self.pm = self.pmx.sum(axis=1)
        self.px = self.pmx.sum(axis=0)
        self.py = self.pmy.sum(axis=0)
        self.kM = p.shape[0]

    @staticmethod
    def _mi(joint, pv):
        pt = joint.sum(axis=-1, keepdims=True)
        den = pt * pv
        pos = joint > 0
        out = np.zeros_like(joint)
        out[pos] = joint[pos] * np.log(joint[pos] / den[pos])
        return out.sum(axis=(-2, -1))

    def value(self, P):
        return self._mi(P @ self.pmx, self.px) - self._mi(P @ self.pmy, self.py)

    def grad(self, P):
        def part(pmv, pv):
            j = P @ pmv
            cond = j / np.maximum(j.sum(axis=-1, keepdims=True), _LOG_FLOOR)
            L = np.log(np.maximum(cond, _LOG_FLOOR)) - np.log(np.maximum(pv, _LOG_FLOOR))
            L = np.where(pv > 0, L, 0.0)
            return L @ pmv.T  # (r, t, m)

        return part(self.pmx, self.px) - part(self.pmy, self.py)


def _ascend(gain: _Gain, P0: np.ndarray, max_iter: int, tol: float):
    """Batched exponentiated-gradient ascent with per-start step control.

    A step is kept only if it increases the gain; otherwise that start's step
    size is halved. Returns (P, values, stationarity gaps, iterations).
    """
    P = P0.copy()
    R = P.shape[0]
    w = np.maximum(gain.pm, _LOG_FLOOR)
    f = gain.value(P)
    eta = np.full(R, 1.0)
    active = np.ones(R, dtype=bool)
    it = 0
    gap = np.full(R, np.inf)
    for it in range(1, max_iter + 1):
        g = gain.grad(P)
        gap = np.sum(g.max(axis=1) - np.sum(P * g, axis=1), axis=-1)
        active &= gap > tol
        if not active.any():
            break
        z = np.log(np.maximum(P, _LOG_FLOOR)) + eta[:, None, None] * g / w
        z -= z.max(axis=1, keepdims=True)
        Pn = np.exp(z)
        Pn /= Pn.sum(axis=1, keepdims=True)
        fn = gain.value(Pn)
        ok = (fn > f) & active
        P[ok] = Pn[ok]
        f = np.where(ok, fn, f)
        eta = np.where(ok, np.minimum(eta * 1.5, 1e4), eta * 0.5)
        active &= eta > 1e-10
    return P, f, gap, it


def _deterministic(assign: Tuple[int, ...], kT: int, kM: int) -> np.ndarray:
    P = np.zeros((kT, kM))
    P[list(assign), np.arange(kM)] = 1.0
    return P


def _set_partitions(n: int, k_max: int):
    """Restricted growth strings of length n using at most k_max labels."""
    def rec(prefix, used):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for lab in range(min(used + 1, k_max)):
            yield from rec(prefix + [lab], max(used, lab + 1))
    yield from rec([], 0)


def _local_search(gain: _Gain, assign: List[int], kT: int) -> Tuple[List[int], float]:
    kM = len(assign)
    best = float(gain.value(_deterministic(tuple(assign), kT, kM)[None])[0])
    improved = True
    while improved:
        improved = False
        for m in range(kM):
            for t in range(kT):
                if t == assign[m]:
                    continue
                trial = list(assign)
                trial[m] = t
                v = float(gain.value(_deterministic(tuple(trial), kT, kM)[None])[0])
                if v > best + 1e-15:
                    assign, best, improved = trial, v, True
    return assign, best


def _seed_channels(dist: DiscreteTriple, direction: str) -> List[np.ndarray]:
    work = dist if _direction(direction) == "X" else dist.swap_xy()
    kM = work.sizes[0]
    seeds = [np.eye(kM), work.channel("X", "M").kernel, work.channel("Y", "M").kernel]
    xy = work.pmf.reshape(kM, -1).T
    pm = work.p_m
    seeds.append(np.divide(xy, pm, out=np.full_like(xy, 1.0 / xy.shape[0]), where=pm > ZERO))
    return [np.asarray(s, dtype=float) for s in seeds]


def info_deficiency_discrete(dist: DiscreteTriple, direction: str = "X", cfg: SolverConfig = SolverConfig(),
                             extra_starts: Optional[List[np.ndarray]] = None) -> IDeficiencyResult:
    """Lower bound on the information deficiency from several search strategies.

    * mirror ascent from ``cfg.restarts`` random starts per cardinality
      2..t_cap, plus channels built from the model itself;
    * greedy single-message reassignment from random deterministic extractors;
    * when ``kM <= 4``, every deterministic extractor (the exhaustive oracle).
    """
    gain = _Gain(dist, direction)
    kM = gain.kM
    t_cap = cfg.t_cap if cfg.t_cap is not None else kM + 1
    tol = cfg.tol * LN2
    rng = np.random.default_rng([cfg.seed, 0 if _direction(direction) == "X" else 1, kM])
    best_val, best_P, best_src = 0.0, np.ones((1, kM)), "constant"
    converged = True
    max_iter = min(cfg.max_iter, 4000)

    def consider(v, P, src):
        nonlocal best_val, best_P, best_src
        if v > best_val + 1e-15:
            best_val, best_P, best_src = float(v), P, src

    exhaustive = kM <= 4
    if exhaustive:
        for assign in _set_partitions(kM, min(t_cap, kM)):
            kT = max(assign) + 1
            P = _deterministic(assign, kT, kM)
            consider(gain.value(P[None])[0], P, "exhaustive")

    starts_by_k = {}
    for S in _seed_channels(dist, direction) + list(extra_starts or []):
        if S.shape[0] <= t_cap:
            starts_by_k.setdefault(S.shape[0], []).append(0.999 * S + 0.001 / S.shape[0])
    for kT in range(2, t_cap + 1):
        for alpha in (0.3, 1.0):
            n = max(1, cfg.restarts // 2)
            starts_by_k.setdefault(kT, []).extend(
                np.moveaxis(rng.dirichlet(np.full(kT, alpha), size=(n, kM)), 2, 1))
    for kT, starts in sorted(starts_by_k.items()):
        if kT < 2:
            continue
        P, f, gap, _ = _ascend(gain, np.array(starts), max_iter, tol)
        k = int(np.argmax(f))
        consider(f[k], P[k], f"ascent(k={kT})")
        converged &= bool(gap[k] <= max(tol, 1e-7))

    for _ in range(max(1, cfg.restarts // 2) if t_cap >= 2 else 0):
        kT = int(rng.integers(2, min(t_cap, kM) + 1))
        assign, v = _local_search(gain, list(rng.integers(0, kT, size=kM)), kT)
        consider(v, _deterministic(tuple(assign), kT, kM), "local-search")

    # polish the incumbent with a final ascent
    if best_P.shape[0] >= 2:
        P, f, gap, _ = _ascend(gain, (0.999999 * best_P + 1e-6 / best_P.shape[0])[None], max_iter, tol)
        consider(f[0], P[0], best_src + "+polish")

    work = dist if _direction(direction) == "X" else dist.swap_xy()
    cmi = mutual_information(work, "M", "X", "Y").nats
    diag = {
        "source": best_src,
        "t_cap": t_cap,
        "t_used": int(best_P.shape[0]),
        "cond_mi_bound_ok": best_val <= cmi + 1e-7 * LN2,
    }
    return IDeficiencyResult(InfoValue(max(best_val, 0.0)), ExtractionChannel(discrete=Channel(best_P)),
                             exhaustive, converged, diag)


# ---------------------------------------------------------------------------
# Gaussian


def _ld(A: np.ndarray) -> float:
    return float(np.linalg.slogdet(0.5 * (A + A.T))[1])


def gaussian_gain(lam_a: np.ndarray, lam_b: np.ndarray, H: np.ndarray) -> float:
    """``I(T;A) - I(T;B)`` in nats for ``T = H M' + N(0, I)``."""
    H = np.atleast_2d(H)
    d = lam_a.shape[0]
    I = np.eye(d)
    P = H.T @ H
    return 0.5 * (_ld(I + lam_a) - _ld(I + lam_b) - _ld(I + P + lam_a) + _ld(I + P + lam_b))


def _gain_grad(lam_a, lam_b, H):
    d = lam_a.shape[0]
    I = np.eye(d)
    P = H.T @ H
    return H @ (np.linalg.inv(I + P + lam_b) - np.linalg.inv(I + P + lam_a))


def gaussian_gain_direct(g: GaussianTriple, H: np.ndarray, direction: str = "X") -> float:
    """Same gain from log-determinants of the joint covariance of (T, M, X, Y)."""
    C, idx = extend_with_extractor(g, H)
    a, b = ("X", "Y") if _direction(direction) == "X" else ("Y", "X")
    return (gaussian_mi_cov(C, idx["T"], idx[a], names=("T", a, "")) -
            gaussian_mi_cov(C, idx["T"], idx[b], names=("T", b, "")))


def _generalized_eig(A: np.ndarray, B: np.ndarray):
    """Eigenpairs of ``A v = mu B v`` for symmetric A and positive definite B, descending."""
    L = np.linalg.cholesky(0.5 * (B + B.T))
    Li = np.linalg.inv(L)
    mu, W = np.linalg.eigh(Li @ A @ Li.T)
    V = Li.T @ W
    order = np.argsort(mu)[::-1]
    return mu[order], V[:, order]


def _complement_rows(V: np.ndarray, d: int) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of the columns of ``V``."""
    if V.shape[1] == 0:
        return np.eye(d)
    Q, _ = np.linalg.qr(V, mode="complete")
    return Q[:, V.shape[1]:].T


def info_deficiency_gaussian(g: GaussianTriple, direction: str = "X",
                             cfg: SolverConfig = SolverConfig()) -> IDeficiencyResult:
    """Search over ``H`` with ``t_rank`` rows for the largest gain.

    Candidates: rank-1 rays ``H = sqrt(s) c^T`` along generalized eigenvectors
    of ``(Lx, Ly)`` and of ``(I+Lx, I+Ly)`` on a log grid of scales, the
    dominant generalized eigen-subspace at the scale cap, and gradient ascent
    from random starts. When the best candidate sits at the scale cap the
    supremum is a limit and ``supremum_at_boundary`` is set.
    """
    lam = lambda_matrices(g)
    la, lb = (lam.lambda_x, lam.lambda_y) if _direction(direction) == "X" else (lam.lambda_y, lam.lambda_x)
    d = la.shape[0]
    I = np.eye(d)
    t_rank = cfg.t_rank if cfg.t_rank is not None else d
    cap = cfg.gauss_scale_cap
    best = (0.0, np.zeros((1, d)), "zero", False)

    def consider(H, src, at_cap=False):
        nonlocal best
        v = gaussian_gain(la, lb, H)
        if v > best[0] + 1e-15:
            best = (v, np.atleast_2d(H), src, at_cap)

    mu, V = _generalized_eig(I + la, I + lb)
    scales = np.logspace(-3, math.log10(cap), 46)
    # (I + lb) v_i is orthogonal to every other generalized eigenvector
    dirs = [V[:, i] for i in range(d)] + [(I + lb) @ V[:, i] for i in range(d)]
    if np.any(np.abs(la - lb) > 0):
        try:
            dirs += [v for v in _generalized_eig(la, lb + 1e-12 * I)[1].T]
        except np.linalg.LinAlgError:
            pass
    w, E = np.linalg.eigh(la - lb)
    dirs.append(E[:, -1])
    for c in dirs:
        c = c / np.linalg.norm(c)
        for s in scales:
            consider(math.sqrt(s) * c[None, :], "ray", s >= cap)
    k = int(min(np.sum(mu > 1.0), t_rank))
    if k:
        # as P grows on a subspace S the gain tends to a ratio of determinants
        # compressed to S^perp, smallest when S^perp spans the bottom eigenvectors
        consider(math.sqrt(cap) * _complement_rows(V[:, k:], d), "subspace", True)
    limit = 0.5 * float(np.sum(np.log(mu[mu > 1.0][:t_rank]))) if k else 0.0

    rng = np.random.default_rng([cfg.seed, d, 0 if _direction(direction) == "X" else 1])
    for _ in range(cfg.restarts):
        H = rng.normal(size=(t_rank, d)) * math.exp(rng.uniform(-2, 3))
        f = gaussian_gain(la, lb, H)
        step = 1.0
        for _ in range(300):
            G = _gain_grad(la, lb, H)
            if np.abs(G).max() < 1e-12:
                break
            while step > 1e-12:
                Hn = H + step * G
                if np.sum(Hn ** 2) > cap * t_rank:
                    Hn *= math.sqrt(cap * t_rank / np.sum(Hn ** 2))
                fn = gaussian_gain(la, lb, Hn)
                if fn > f:
                    break
                step *= 0.5
            else:
                break
            H, f = Hn, fn
            step *= 2.0
        consider(H, "ascent", np.sum(H ** 2) >= 0.99 * cap)

    val, H, src, at_cap = best
    diag = {
        "source": src,
        "supremum_at_boundary": bool(at_cap),
        "limit_bits": limit / LN2,
        "scale_cap": cap,
        "t_rank": t_rank,
        "generalized_eigenvalues": [float(m) for m in mu],
    }
    return IDeficiencyResult(InfoValue(max(val, 0.0)), ExtractionChannel(gaussian=H), True, True, diag)


# ---------------------------------------------------------------------------
# atoms and checks


def _bounds(atoms: PidAtoms, dist) -> dict:
    i_mxy, i_mx, i_my = mutual_informations(dist)
    cmi_x = (i_mxy - i_my).bits
    a = atoms
    checks = {
        "ui_x>=0": -a.ui_x.bits,
        "ui_y>=0": -a.ui_y.bits,
        "ri>=0": -a.ri.bits,
        "si>=0": -a.si.bits,
        "ui_x<=I(M;X)": a.ui_x.bits - i_mx.bits,
        "ri<=I(M;X)": a.ri.bits - i_mx.bits,
        "ui_x<=I(M;X|Y)": a.ui_x.bits - cmi_x,
        "si<=I(M;X|Y)": a.si.bits - cmi_x,
    }
    return checks


def bound_report(atoms: PidAtoms, dist) -> dict:
    """Excess (bits) of each of the eight natural bounds; positive means violated."""
    return _bounds(atoms, dist)


def ipid(dist: Union[DiscreteTriple, GaussianTriple], cfg: SolverConfig = SolverConfig(),
         check_bounds: bool = True) -> Tuple[PidAtoms, CyanReport]:
    solver = info_deficiency_gaussian if isinstance(dist, GaussianTriple) else info_deficiency_discrete
    rx, ry = pmap(lambda d: solver(dist, d, cfg), ("X", "Y"), cfg.n_threads())
    diag = {
        "converged": rx.converged and ry.converged,
        "deficiency_x_bits": rx.value.bits,
        "deficiency_y_bits": ry.value.bits,
        "deficiency_x_nats": rx.value.nats,
        "deficiency_y_nats": ry.value.nats,
        "certified_lower_bound": rx.certified_lower_bound and ry.certified_lower_bound,
        "x": rx.diagnostics,
        "y": ry.diagnostics,
    }
    atoms, cyan = symmetrized_atoms(dist, rx.value, ry.value, "ipid", diag)
    atoms.diagnostics.update(cyan_x_bits=cyan.cyan_x.bits, cyan_y_bits=cyan.cyan_y.bits, loose_side=cyan.loose)
    bounds = _bounds(atoms, dist)
    atoms.diagnostics["bound_excess_bits"] = bounds
    worst = max(bounds.values())
    if check_bounds and worst > BOUND_SLACK:
        raise BoundViolation(f"I-PID bound violated by {worst:.3g} bits", dict(atoms.diagnostics))
    atoms.diagnostics["extractors"] = (rx.extractor, ry.extractor)
    return atoms, cyan


def random_extractors(rng: np.random.Generator, kM: int, trials: int, include_deterministic: bool = True):
    out = []
    if include_deterministic and kM <= 4:
        for assign in _set_partitions(kM, kM):
            out.append(_deterministic(assign, max(assign) + 1, kM))
    for _ in range(trials):
        kF = int(rng.integers(1, kM + 2))
        alpha = float(rng.choice([0.1, 0.5, 1.0, 3.0]))
        out.append(rng.dirichlet(np.full(kF, alpha), size=kM).T)
    return out


def extraction_bound_check(dist: DiscreteTriple, cfg: SolverConfig = SolverConfig(), trials: int = 500,
                           atoms: Optional[PidAtoms] = None, escalations: int = 3) -> dict:
    """Largest ``I(F;X) - I(F;Y) - UI_X`` over sampled extractors F (bits).

    A positive value means some F beats the computed deficiency; the deficiency
    is then re-solved with doubled restarts, seeded with the violating F.
    """
    rng = np.random.default_rng([cfg.seed, 7])
    kM = dist.sizes[0]
    Fs = random_extractors(rng, kM, trials)
    gx = _Gain(dist, "X")
    gy = _Gain(dist, "Y")
    if atoms is None:
        atoms, _ = ipid(dist, cfg)
    history = []
    for round_ in range(escalations + 1):
        worst = -math.inf
        worst_F = {}
        for F in Fs:
            P = F[None]
            vx = float(gx.value(P)[0]) / LN2 - atoms.ui_x.bits
            vy = float(gy.value(P)[0]) / LN2 - atoms.ui_y.bits
            for side, v in (("X", vx), ("Y", vy)):
                if v > worst:
                    worst = v
                if v > BOUND_SLACK and (side not in worst_F or v > worst_F[side][0]):
                    worst_F[side] = (v, F)
        history.append(worst)
        if worst <= BOUND_SLACK or round_ == escalations:
            break
        cfg = cfg.with_(restarts=2 * max(cfg.restarts, 1))
        res = {}
        for side in "XY":
            extra = [worst_F[side][1]] if side in worst_F else []
            res[side] = info_deficiency_discrete(dist, side, cfg, extra_starts=extra)
        atoms, _ = symmetrized_atoms(dist, res["X"].value, res["Y"].value, "ipid", {"escalated": round_ + 1})
    return {"max_violation_bits": worst, "history": history, "trials": len(Fs), "atoms": atoms}


@dataclass(frozen=True)
class BlackwellianReport:
    ui_x_bits: float
    ui_y_bits: float
    y_sufficient: bool
    x_sufficient: bool
    agree_x: bool
    agree_y: bool
    witness: Optional[np.ndarray]
    min_eig_y_minus_x: float

    @property
    def agree(self) -> bool:
        return self.agree_x and self.agree_y


def blackwellian_check_gaussian(g: GaussianTriple, cfg: SolverConfig = SolverConfig()) -> BlackwellianReport:
    """Compare positivity of each unique information with failure of the Lambda order.

    ``witness`` is a direction c with ``c^T Lx c > c^T Ly c`` whenever Y is not
    sufficient for X (top eigenvector of ``Lx - Ly``).
    """
    atoms, _ = ipid(g, cfg)
    lam = lambda_matrices(g)
    y_suff = sufficiency_gaussian(g, "Y>=X")
    x_suff = sufficiency_gaussian(g, "X>=Y")
    witness = None
    if not y_suff:
        w, E = np.linalg.eigh(lam.lambda_x - lam.lambda_y)
        witness = E[:, -1]
    ux, uy = atoms.ui_x.bits, atoms.ui_y.bits
    return BlackwellianReport(ux, uy, y_suff, x_suff, (ux > UI_POSITIVE) == (not y_suff),
                              (uy > UI_POSITIVE) == (not x_suff), witness,
                              psd_min_eig(lam.lambda_y - lam.lambda_x))
