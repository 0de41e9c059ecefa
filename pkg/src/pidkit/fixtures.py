"""Canonical distributions and random instance generators used by tests,
scripts and the CLI examples."""
from __future__ import annotations

import itertools

import numpy as np

from .prob import DiscreteTriple, GaussianTriple


def _from_outcomes(outcomes, sizes):
    p = np.zeros(sizes)
    for (m, x, y), w in outcomes:
        p[m, x, y] += w
    return DiscreteTriple(p)


def xor() -> DiscreteTriple:
    """X, Y iid uniform bits and M = X xor Y."""
    return _from_outcomes((((x ^ y, x, y), 0.25) for x in (0, 1) for y in (0, 1)), (2, 2, 2))


def and_() -> DiscreteTriple:
    """X, Y iid uniform bits and M = X and Y."""
    return _from_outcomes((((x & y, x, y), 0.25) for x in (0, 1) for y in (0, 1)), (2, 2, 2))


def copy() -> DiscreteTriple:
    """M = X = Y, a uniform bit."""
    return _from_outcomes((((b, b, b), 0.5) for b in (0, 1)), (2, 2, 2))


def copy_const_y() -> DiscreteTriple:
    """M = X a uniform bit, Y a constant symbol."""
    return _from_outcomes((((b, b, 0), 0.5) for b in (0, 1)), (2, 2, 1))


def independent(sizes=(2, 2, 2)) -> DiscreteTriple:
    return DiscreteTriple(np.full(sizes, 1.0 / np.prod(sizes)))


def one_bit_each() -> DiscreteTriple:
    """Four message bits, one unique to X, one unique to Y, one shared, one synergistic.

    M = (M1, M2, M3, M4), X = (M1, M3, M4 xor Z), Y = (M2, M3, Z) with all
    bits iid uniform. Symbols are packed big-endian.
    """
    outcomes = []
    for m1, m2, m3, m4, z in itertools.product((0, 1), repeat=5):
        m = (m1 << 3) | (m2 << 2) | (m3 << 1) | m4
        x = (m1 << 2) | (m3 << 1) | (m4 ^ z)
        y = (m2 << 2) | (m3 << 1) | z
        outcomes.append(((m, x, y), 1 / 32))
    return _from_outcomes(outcomes, (16, 8, 8))


CANONICAL = {
    "xor": xor,
    "and": and_,
    "copy": copy,
    "copy_const_y": copy_const_y,
    "one_bit_each": one_bit_each,
}


def random_triple(rng: np.random.Generator, sizes=(3, 3, 3), alpha: float = 1.0) -> DiscreteTriple:
    """Joint pmf drawn from a symmetric Dirichlet(alpha)."""
    p = rng.dirichlet(np.full(int(np.prod(sizes)), alpha)).reshape(sizes)
    return DiscreteTriple(p / p.sum())


def random_channel(rng: np.random.Generator, n_out: int, n_in: int, alpha: float = 1.0) -> np.ndarray:
    """Column-stochastic ``(n_out, n_in)`` kernel with Dirichlet columns."""
    return rng.dirichlet(np.full(n_out, alpha), size=n_in).T


def garbled_triple(rng: np.random.Generator, sizes=(3, 3, 3), alpha: float = 1.0) -> DiscreteTriple:
    """Triple in which X is generated from Y alone, so Y is Blackwell sufficient for X."""
    kM, kX, kY = sizes
    pm = rng.dirichlet(np.ones(kM))
    py_m = random_channel(rng, kY, kM, alpha)
    px_y = random_channel(rng, kX, kY, alpha)
    p = np.einsum("m,ym,xy->mxy", pm, py_m, px_y)
    return DiscreteTriple(p / p.sum())


def random_gaussian(rng: np.random.Generator, dims=(2, 2, 2)) -> GaussianTriple:
    """Random linear-Gaussian model X = A M + noise, Y = B M + noise (correlated noise)."""
    dM, dX, dY = dims
    Sm = _random_spd(rng, dM)
    A = rng.normal(size=(dX, dM))
    B = rng.normal(size=(dY, dM))
    N = _random_spd(rng, dX + dY)
    return _linear_gaussian(Sm, A, B, N)


def nested_gaussian(rng: np.random.Generator, dims=(2, 2, 2)) -> GaussianTriple:
    """X is a noisy linear function of Y, so Y is Blackwell sufficient for X."""
    dM, dX, dY = dims
    Sm = _random_spd(rng, dM)
    B = rng.normal(size=(dY, dM))
    Ny = _random_spd(rng, dY)
    C = rng.normal(size=(dX, dY))
    Nx = _random_spd(rng, dX)
    cov_my = np.block([[Sm, Sm @ B.T], [B @ Sm, B @ Sm @ B.T + Ny]])
    # X = C Y + noise
    n = dM + dY
    L = np.zeros((n + dX, n))
    L[:n, :n] = np.eye(n)
    L[n:, dM:] = C
    cov = L @ cov_my @ L.T
    cov[n:, n:] += Nx
    order = np.r_[np.arange(dM), np.arange(n, n + dX), np.arange(dM, n)]
    return GaussianTriple(dims, cov[np.ix_(order, order)])


def scalar_gaussian(snr_x: float, snr_y: float, rho: float = 0.0) -> GaussianTriple:
    """M ~ N(0,1), X = M + N(0, 1/snr_x), Y = M + N(0, 1/snr_y); noise correlation rho."""
    vx, vy = 1.0 / snr_x, 1.0 / snr_y
    c = rho * np.sqrt(vx * vy)
    cov = np.array([[1.0, 1.0, 1.0], [1.0, 1.0 + vx, 1.0 + c], [1.0, 1.0 + c, 1.0 + vy]])
    return GaussianTriple((1, 1, 1), cov)


def _random_spd(rng, d):
    A = rng.normal(size=(d, d))
    return A @ A.T + 0.5 * np.eye(d)


def _linear_gaussian(Sm, A, B, N):
    dM, dX, dY = Sm.shape[0], A.shape[0], B.shape[0]
    G = np.vstack([np.eye(dM), A, B])
    cov = G @ Sm @ G.T
    cov[dM:, dM:] += N
    return GaussianTriple((dM, dX, dY), cov)


def gaussian_from_lambdas(lam_x: np.ndarray, lam_y: np.ndarray) -> GaussianTriple:
    """A Gaussian triple (Sigma_M = I) whose Lambda matrices equal the given PSD matrices.

    X = M + N(0, lam_x^{-1}) restricted to the range is awkward, so X and Y are
    taken with dims equal to dM, X = M + W_x, Cov(W_x) = lam_x^{-1}. Requires
    positive definite inputs. X and Y noises are independent.
    """
    lam_x = np.asarray(lam_x, float)
    lam_y = np.asarray(lam_y, float)
    d = lam_x.shape[0]
    Nx = np.linalg.inv(lam_x)
    Ny = np.linalg.inv(lam_y)
    G = np.vstack([np.eye(d), np.eye(d), np.eye(d)])
    cov = G @ G.T
    cov[d:2 * d, d:2 * d] += Nx
    cov[2 * d:, 2 * d:] += Ny
    return GaussianTriple((d, d, d), cov)
