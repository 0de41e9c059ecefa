"""Interior-point Newton solver over column-stochastic matrices."""
from __future__ import annotations

import numpy as np

from .config import SolverConfig
from .prob import LN2


def minimize_barrier(prob, K0, cfg: SolverConfig, mu0: float = 1e-3, mu_min: float = 1e-14,
                     inner: int = 60):
    """Log-barrier Newton path over the product of simplices (one per column).

    ``prob`` supplies ``value``, ``grad`` and ``hess_blocks`` (one ``(n, n)``
    block per row of ``K``, the Hessian being block-diagonal over rows).

    Steps are affine-scaled, ``d = K * u``, so near-zero entries keep a
    well-conditioned system. Returns (K, value_nats, newton_steps, converged,
    gap_nats) where the gap is the Frank-Wolfe bound at the final point.
    """
    K = np.array(K0, dtype=float)
    kX, n = K.shape
    N = kX * n
    A = np.zeros((n, N))
    for x in range(kX):
        A[np.arange(n), x * n + np.arange(n)] = 1.0
    steps = 0
    mu = mu0
    M = np.zeros((N + n, N + n))
    while True:
        f = prob.value(K) - mu * float(np.sum(np.log(K)))
        for _ in range(inner):
            g = prob.grad(K) - mu / K
            H = prob.hess_blocks(K)
            q = K.ravel()
            M[:N, :N] = 0.0
            for x in range(kX):
                sl = slice(x * n, (x + 1) * n)
                M[sl, sl] = K[x][:, None] * H[x] * K[x][None, :]
            M[:N, :N] += mu * np.eye(N)
            Aq = A * q[None, :]
            M[N:, :N] = Aq
            M[:N, N:] = Aq.T
            r = 1.0 - K.sum(axis=0)
            rhs = np.concatenate([-q * g.ravel(), r])
            if not np.all(np.isfinite(M[:N, :N])) or not np.all(np.isfinite(rhs)):
                break
            try:
                sol = np.linalg.solve(M, rhs)
            except np.linalg.LinAlgError:
                sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
            u = sol[:N]
            d = (q * u).reshape(kX, n)
            dec = -float(np.sum(g * d))
            # centred enough for this mu
            if dec <= 1e-2 * mu and np.abs(r).max() <= 1e-14:
                break
            t = min(1.0, 0.95 / float(-u.min())) if u.min() < 0 else 1.0
            if dec <= 1e-13:
                K = K + t * d
                f = prob.value(K) - mu * float(np.sum(np.log(K)))
                steps += 1
                continue
            while t > 1e-12:
                Kn = K + t * d
                fn = prob.value(Kn) - mu * float(np.sum(np.log(Kn)))
                if fn <= f - 1e-4 * t * dec + 1e-15 * max(1.0, abs(f)):
                    break
                t *= 0.5
            else:
                break
            K, f = Kn, fn
            steps += 1
        if mu <= mu_min:
            break
        mu = max(mu * 0.1, mu_min)
    K = np.clip(K, 0.0, None)
    K /= K.sum(axis=0, keepdims=True)
    g = prob.grad(K)
    gap = float(np.sum(g * K) - np.sum(g.min(axis=0)))
    return K, prob.value(K), steps, gap <= cfg.tol * LN2, gap
