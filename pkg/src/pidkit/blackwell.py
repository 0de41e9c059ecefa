"""Blackwell sufficiency between channels, Le Cam deficiency, and the
Gaussian ordering through Lambda matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import lp
from .prob import Channel, GaussianTriple, InvalidArgument, SingularModelError, GAUSS_EIG_TOL

SUFFICIENCY_TOL = 1e-7
PSD_TOL = -1e-8


@dataclass(frozen=True)
class SufficiencyVerdict:
    sufficient: bool
    witness: Optional[Channel]
    residual: float


@dataclass(frozen=True)
class LambdaPair:
    lambda_x: np.ndarray
    lambda_y: np.ndarray


def _check_shared_input(a: Channel, b: Channel):
    if a.in_size != b.in_size:
        raise InvalidArgument(f"channels have different input alphabets ({a.in_size} vs {b.in_size})")


def _stochastic_rows(n_out: int, n_in: int, n_vars: int) -> np.ndarray:
    """Equality rows forcing each input column of an ``(n_out, n_in)`` kernel to sum to one."""
    A = np.zeros((n_in, n_vars))
    for i in range(n_in):
        A[i, i:n_out * n_in:n_in] = 1.0
    return A


def _clean_kernel(k: np.ndarray) -> np.ndarray:
    k = np.clip(k, 0.0, None)
    return k / k.sum(axis=0, keepdims=True)


def sufficiency_discrete(px: Channel, py: Channel) -> SufficiencyVerdict:
    """Test ``X >=_M Y``: is there a garbling K with ``K o px = py``?

    Solved as the LP ``min t`` s.t. ``|K px - py| <= t`` entrywise over
    column-stochastic K; sufficient iff the optimum is at most 1e-7.
    """
    _check_shared_input(px, py)
    kX, kM = px.kernel.shape
    kY = py.out_size
    nk = kY * kX
    n = nk + 1
    # (K px)[y, m] = sum_x K[y, x] px[x, m]; variable index y*kX + x
    G = np.zeros((kY * kM, nk))
    for y in range(kY):
        for m in range(kM):
            G[y * kM + m, y * kX:(y + 1) * kX] = px.kernel[:, m]
    target = py.kernel.ravel()
    ones = np.ones((kY * kM, 1))
    A_ub = np.vstack([np.hstack([G, -ones]), np.hstack([-G, -ones])])
    b_ub = np.concatenate([target, -target])
    A_eq = _stochastic_rows(kY, kX, n)
    b_eq = np.ones(kX)
    c = np.zeros(n)
    c[-1] = 1.0
    res = lp.linprog(c, A_ub, b_ub, A_eq, b_eq)
    if not res.success:
        raise RuntimeError(f"sufficiency LP failed (status {res.status})")
    K = _clean_kernel(res.x[:nk].reshape(kY, kX))
    residual = float(np.abs(K @ px.kernel - py.kernel).max())
    ok = residual <= SUFFICIENCY_TOL
    return SufficiencyVerdict(ok, Channel(K), residual)


def lecam_witness(px: Channel, py: Channel) -> Tuple[float, Channel]:
    """Le Cam deficiency of Y w.r.t. X and the optimal kernel ``P[X'|Y]``.

    ``min_K max_m TV(K py(.|m), px(.|m))`` with TV = half the L1 distance.
    """
    _check_shared_input(px, py)
    kX, kM = px.kernel.shape
    kY = py.out_size
    nk = kX * kY
    nu = kX * kM
    n = nk + nu + 1
    G = np.zeros((kX * kM, nk))
    for x in range(kX):
        for m in range(kM):
            G[x * kM + m, x * kY:(x + 1) * kY] = py.kernel[:, m]
    target = px.kernel.ravel()
    I = np.eye(nu)
    z = np.zeros((nu, 1))
    rows = [np.hstack([G, -I, z]), np.hstack([-G, -I, z])]
    # 0.5 * sum_x u[x, m] <= t
    T = np.zeros((kM, n))
    for m in range(kM):
        T[m, nk + m:nk + nu:kM] = 0.5
        T[m, -1] = -1.0
    A_ub = np.vstack(rows + [T])
    b_ub = np.concatenate([target, -target, np.zeros(kM)])
    A_eq = _stochastic_rows(kX, kY, n)
    c = np.zeros(n)
    c[-1] = 1.0
    res = lp.linprog(c, A_ub, b_ub, A_eq, np.ones(kY))
    if not res.success:
        raise RuntimeError(f"Le Cam LP failed (status {res.status})")
    K = _clean_kernel(res.x[:nk].reshape(kX, kY))
    value = float(0.5 * np.abs(K @ py.kernel - px.kernel).sum(axis=0).max())
    return min(max(value, 0.0), 1.0), Channel(K)


def lecam_deficiency(px: Channel, py: Channel) -> float:
    """How far Y is from emulating X, worst case over messages, in total variation."""
    return lecam_witness(px, py)[0]


# ---------------------------------------------------------------------------
# Gaussian


def _inv_sqrt(S: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return V @ np.diag(w ** -0.5) @ V.T


def _lambda(g: GaussianTriple, v: str) -> np.ndarray:
    Smm = g.block("M", "M")
    Svm = g.block(v, "M")
    Svv = g.block(v, v)
    cond = Svv - Svm @ np.linalg.solve(Smm, Svm.T)
    cond = 0.5 * (cond + cond.T)
    w = np.linalg.eigvalsh(cond)
    if w.min() < GAUSS_EIG_TOL:
        raise SingularModelError(f"Sigma_{v}|M", w.min())
    W = _inv_sqrt(Smm)
    # whitened cross-covariance Cov(V, M') = Svm W
    C = Svm @ W
    L = C.T @ np.linalg.solve(cond, C)
    return 0.5 * (L + L.T)


def lambda_matrices(g: GaussianTriple) -> LambdaPair:
    """``Lambda_V = Cov(V,M')^T Sigma_{V|M}^{-1} Cov(V,M')`` with M' the whitened message."""
    return LambdaPair(_lambda(g, "X"), _lambda(g, "Y"))


def psd_min_eig(A: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (A + A.T)).min())


def sufficiency_gaussian(g: GaussianTriple, direction: str = "Y>=X") -> bool:
    """Blackwell order of a Gaussian triple: ``Y >=_M X`` iff ``Lambda_Y - Lambda_X`` is PSD."""
    lam = lambda_matrices(g)
    if direction.replace(" ", "") in ("Y>=X", "Y"):
        return psd_min_eig(lam.lambda_y - lam.lambda_x) >= PSD_TOL
    if direction.replace(" ", "") in ("X>=Y", "X"):
        return psd_min_eig(lam.lambda_x - lam.lambda_y) >= PSD_TOL
    raise InvalidArgument(f"direction must be 'Y>=X' or 'X>=Y', got {direction!r}")
