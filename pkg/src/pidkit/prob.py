"""Discrete and Gaussian joint distributions over (M, X, Y), channels, and the
basic information measures every solver builds on.

Conventions: information is computed in nats internally and handed out as
:class:`InfoValue` (bits and nats). ``0 log 0 = 0``; probabilities below
``ZERO`` count as exact zeros when deciding supports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

LN2 = math.log(2.0)
ZERO = 1e-15
SUM_TOL = 1e-9
DEGENERATE_MASS = 1e-12
VARS = "MXY"


class InvalidArgument(ValueError):
    """Raised when an operation receives arguments violating its preconditions."""


class SingularModelError(ValueError):
    """Raised when a Gaussian model needs a covariance block that is singular."""

    def __init__(self, block: str, min_eig: float):
        self.block = block
        self.min_eig = float(min_eig)
        super().__init__(f"covariance block {block} is singular (min eigenvalue {min_eig:.3e})")


@dataclass(frozen=True, order=True)
class InfoValue:
    """An information quantity. Stored in nats; ``bits`` is derived."""

    nats: float

    @classmethod
    def from_bits(cls, bits: float) -> "InfoValue":
        return cls(float(bits) * LN2)

    @property
    def bits(self) -> float:
        return self.nats / LN2

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.nats)

    def __float__(self) -> float:
        return self.bits

    def __add__(self, other: "InfoValue") -> "InfoValue":
        return InfoValue(self.nats + other.nats)

    def __sub__(self, other: "InfoValue") -> "InfoValue":
        return InfoValue(self.nats - other.nats)

    def __neg__(self) -> "InfoValue":
        return InfoValue(-self.nats)

    def __repr__(self) -> str:
        return f"InfoValue(bits={self.bits:.10g})"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _axes(vars_: Union[str, Iterable[str]]) -> Tuple[int, ...]:
    names = list(vars_)
    for v in names:
        if v not in VARS:
            raise InvalidArgument(f"unknown variable {v!r}; expected letters of 'MXY'")
    if len(set(names)) != len(names):
        raise InvalidArgument(f"repeated variable in {''.join(names)!r}")
    return tuple(sorted(VARS.index(v) for v in names))


@dataclass(frozen=True, eq=False)
class DiscreteTriple:
    """Joint pmf ``pmf[m, x, y]`` over finite alphabets."""

    pmf: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if p.ndim != 3:
            raise InvalidArgument(f"pmf must be a 3-d table [m][x][y], got ndim={p.ndim}")
        if min(p.shape) < 1:
            raise InvalidArgument(f"alphabet sizes must be >= 1, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise InvalidArgument("pmf contains non-finite entries")
        if p.min() < 0:
            raise InvalidArgument(f"pmf has a negative entry {p.min():.3e}")
        total = p.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidArgument(f"pmf sums to {total:.12g}, not 1")
        object.__setattr__(self, "pmf", _readonly(p))

    @property
    def sizes(self) -> Tuple[int, int, int]:
        return tuple(self.pmf.shape)

    def channel(self, target: str, given: str = "M") -> "Channel":
        return conditional_channel(self, target, given)

    @property
    def p_m(self) -> np.ndarray:
        return self.pmf.sum(axis=(1, 2))

    def swap_xy(self) -> "DiscreteTriple":
        return DiscreteTriple(np.transpose(self.pmf, (0, 2, 1)))

    def __repr__(self) -> str:
        return f"DiscreteTriple(sizes={self.sizes})"


@dataclass(frozen=True, eq=False)
class Channel:
    """Conditional table ``kernel[out, in]``; each column is a distribution.

    ``degenerate`` lists inputs whose conditioning event had (numerically)
    zero probability and were given a uniform column.
    """

    kernel: np.ndarray
    degenerate: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        if k.ndim != 2 or min(k.shape) < 1:
            raise InvalidArgument(f"kernel must be a non-empty 2-d table, got shape {k.shape}")
        if not np.all(np.isfinite(k)) or k.min() < -ZERO:
            raise InvalidArgument("kernel entries must be finite and non-negative")
        col = k.sum(axis=0)
        bad = np.flatnonzero(np.abs(col - 1.0) > SUM_TOL)
        if bad.size:
            raise InvalidArgument(f"kernel column {int(bad[0])} sums to {col[bad[0]]:.12g}, not 1")
        object.__setattr__(self, "kernel", _readonly(np.clip(k, 0.0, None)))
        object.__setattr__(self, "degenerate", tuple(int(i) for i in self.degenerate))

    @property
    def in_size(self) -> int:
        return self.kernel.shape[1]

    @property
    def out_size(self) -> int:
        return self.kernel.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Channel":
        return cls(np.eye(n))

    @classmethod
    def bsc(cls, eps: float) -> "Channel":
        return cls(np.array([[1 - eps, eps], [eps, 1 - eps]]))

    @classmethod
    def constant(cls, dist: Sequence[float], in_size: int) -> "Channel":
        d = np.asarray(dist, dtype=float).reshape(-1, 1)
        return cls(np.repeat(d, in_size, axis=1))

    def __repr__(self) -> str:
        return f"Channel({self.out_size}x{self.in_size})"


@dataclass(frozen=True, eq=False)
class GaussianTriple:
    """Zero-mean jointly Gaussian (M, X, Y); ``cov`` in block order [M, X, Y]."""

    dims: Tuple[int, int, int]
    cov: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or min(dims) < 1:
            raise InvalidArgument(f"dims must be three positive integers, got {self.dims}")
        c = np.asarray(self.cov, dtype=float)
        n = sum(dims)
        if c.shape != (n, n):
            raise InvalidArgument(f"cov must be {n}x{n} for dims {dims}, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidArgument("cov contains non-finite entries")
        asym = np.abs(c - c.T).max()
        if asym > 1e-9:
            raise InvalidArgument(f"cov is not symmetric (max asymmetry {asym:.3e})")
        c = 0.5 * (c + c.T)
        min_eig = np.linalg.eigvalsh(c).min()
        if min_eig < -1e-9:
            raise InvalidArgument(f"cov is not positive semidefinite (min eigenvalue {min_eig:.3e})")
        m_eig = np.linalg.eigvalsh(c[: dims[0], : dims[0]]).min()
        if m_eig < 1e-9:
            raise InvalidArgument(f"Sigma_M is not invertible (min eigenvalue {m_eig:.3e})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "cov", _readonly(c))

    def index(self, vars_: Union[str, Iterable[str]]) -> np.ndarray:
        dM, dX, dY = self.dims
        starts = {"M": 0, "X": dM, "Y": dM + dX}
        ix = []
        for ax in _axes(vars_):
            v = VARS[ax]
            ix.extend(range(starts[v], starts[v] + self.dims[ax]))
        return np.array(ix, dtype=int)

    def block(self, a: str, b: str) -> np.ndarray:
        return self.cov[np.ix_(self.index(a), self.index(b))]

    def swap_xy(self) -> "GaussianTriple":
        order = np.concatenate([self.index("M"), self.index("Y"), self.index("X")])
        dM, dX, dY = self.dims
        return GaussianTriple((dM, dY, dX), self.cov[np.ix_(order, order)])

    def __repr__(self) -> str:
        return f"GaussianTriple(dims={self.dims})"


# ---------------------------------------------------------------------------
# discrete operations


def marginalize(dist: DiscreteTriple, keep: Union[str, Iterable[str]]) -> np.ndarray:
    """Marginal table over ``keep`` (axes kept in M, X, Y order)."""
    keep_axes = _axes(keep)
    if not keep_axes:
        raise InvalidArgument("keep must name at least one variable")
    drop = tuple(ax for ax in range(3) if ax not in keep_axes)
    return dist.pmf.sum(axis=drop) if drop else dist.pmf.copy()


def conditional_channel(dist: DiscreteTriple, target: str, given: Union[str, Iterable[str]]) -> Channel:
    """Channel ``P[target | given]``; inputs enumerate ``given`` row-major."""
    t_ax = _axes(target)
    g_ax = _axes(given)
    if len(t_ax) != 1:
        raise InvalidArgument("target must be a single variable")
    if not g_ax:
        raise InvalidArgument("given must name at least one variable")
    if t_ax[0] in g_ax:
        raise InvalidArgument("target must not be among the conditioning variables")
    joint = marginalize(dist, "".join(VARS[a] for a in sorted(g_ax + t_ax)))
    # move target axis first, flatten the conditioning axes
    pos = sorted(g_ax + t_ax).index(t_ax[0])
    joint = np.moveaxis(joint, pos, 0).reshape(dist.sizes[t_ax[0]], -1)
    cond = joint.sum(axis=0)
    degenerate = np.flatnonzero(cond < DEGENERATE_MASS)
    kernel = np.empty_like(joint)
    ok = cond >= DEGENERATE_MASS
    kernel[:, ok] = joint[:, ok] / cond[ok]
    kernel[:, ~ok] = 1.0 / joint.shape[0]
    return Channel(kernel, tuple(degenerate))


def compose(outer: Channel, inner: Channel) -> Channel:
    """``(outer o inner)[a, c] = sum_b outer[a, b] inner[b, c]``."""
    if outer.in_size != inner.out_size:
        raise InvalidArgument(
            f"cannot compose: outer takes {outer.in_size} inputs, inner emits {inner.out_size}"
        )
    k = outer.kernel @ inner.kernel
    return Channel(k / k.sum(axis=0, keepdims=True))


def xlogy_over(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Elementwise ``p log(p / q)`` with ``0 log 0 = 0``; ``+inf`` where p>0, q=0."""
    p = np.asarray(p, dtype=float)
    q = np.broadcast_to(np.asarray(q, dtype=float), p.shape)
    out = np.zeros(p.shape)
    pos = p > ZERO
    qpos = q > 0
    both = pos & qpos
    out[both] = p[both] * (np.log(p[both]) - np.log(q[both]))
    out[pos & ~qpos] = np.inf
    return out


def entropy_nats(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > ZERO]
    return float(-np.sum(p * np.log(p)))


def _h(dist: DiscreteTriple, vars_: Sequence[int]) -> float:
    if not vars_:
        return 0.0
    drop = tuple(ax for ax in range(3) if ax not in vars_)
    return entropy_nats(dist.pmf.sum(axis=drop) if drop else dist.pmf)


def mutual_information(
    dist: DiscreteTriple,
    a: Union[str, Iterable[str]],
    b: Union[str, Iterable[str]],
    given: Union[str, Iterable[str]] = "",
) -> InfoValue:
    """``I(a; b | given)`` where each argument is a string of variable letters."""
    A, B, C = _axes(a), _axes(b), _axes(given)
    if not A or not B:
        raise InvalidArgument("both arguments of I(.;.) must be non-empty")
    if set(A) & set(B) or set(A) & set(C) or set(B) & set(C):
        raise InvalidArgument("variables in I(a;b|c) must be distinct")
    AC = sorted(set(A) | set(C))
    BC = sorted(set(B) | set(C))
    ABC = sorted(set(A) | set(B) | set(C))
    val = _h(dist, AC) + _h(dist, BC) - _h(dist, ABC) - _h(dist, sorted(C))
    return InfoValue(max(val, 0.0) if val > -1e-12 else val)


def interaction_information(dist: DiscreteTriple) -> InfoValue:
    """Co-information ``I(M;X) - I(M;X|Y)`` (may be negative)."""
    h = lambda *v: _h(dist, sorted(v))
    val = h(0) + h(1) + h(2) - h(0, 1) - h(0, 2) - h(1, 2) + h(0, 1, 2)
    return InfoValue(val)


def interaction_information_table(q: np.ndarray) -> float:
    """Co-information in nats of an arbitrary (unvalidated) joint table."""
    q = np.asarray(q, dtype=float)
    H = lambda axes: entropy_nats(q.sum(axis=axes) if axes else q)
    return (
        H((1, 2)) + H((0, 2)) + H((0, 1))
        - H((2,)) - H((1,)) - H((0,))
        + H(())
    )


def cond_mi_table(q: np.ndarray) -> float:
    """``I(M;X|Y)`` in nats of a joint table ``q[m, x, y]``."""
    q = np.asarray(q, dtype=float)
    qy = q.sum(axis=(0, 1))
    qmy = q.sum(axis=1)
    qxy = q.sum(axis=0)
    return entropy_nats(qmy) + entropy_nats(qxy) - entropy_nats(q) - entropy_nats(qy)


def mi_joint(pab: np.ndarray) -> float:
    """``I(A;B)`` in nats of a 2-d joint table."""
    pab = np.asarray(pab, dtype=float)
    return entropy_nats(pab.sum(axis=1)) + entropy_nats(pab.sum(axis=0)) - entropy_nats(pab)


def expected_kl(p: Channel, q: Channel, prior: Sequence[float]) -> InfoValue:
    """``E_{m ~ prior} D(p(.|m) || q(.|m))``; ``+inf`` on support mismatch."""
    prior = np.asarray(prior, dtype=float)
    if p.kernel.shape != q.kernel.shape:
        raise InvalidArgument(f"channel shapes differ: {p.kernel.shape} vs {q.kernel.shape}")
    if prior.shape != (p.in_size,):
        raise InvalidArgument(f"prior must have {p.in_size} entries")
    if prior.min() < 0 or abs(prior.sum() - 1) > SUM_TOL:
        raise InvalidArgument("prior is not a pmf")
    live = prior > ZERO
    # each column is a divergence; clip round-off below zero
    terms = np.maximum(xlogy_over(p.kernel[:, live], q.kernel[:, live]).sum(axis=0), 0.0)
    return InfoValue(float(np.dot(prior[live], terms)))


# ---------------------------------------------------------------------------
# Gaussian operations

GAUSS_EIG_TOL = 1e-9


def _logdet_checked(S: np.ndarray, name: str) -> float:
    S = 0.5 * (S + S.T)
    w = np.linalg.eigvalsh(S)
    if w.min() < GAUSS_EIG_TOL:
        raise SingularModelError(name, w.min())
    return float(np.sum(np.log(w)))


def gaussian_mi_cov(cov: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray = None,
                    names: Tuple[str, str, str] = ("A", "B", "C")) -> float:
    """``I(A;B|C)`` in nats for a zero-mean Gaussian with covariance ``cov``."""
    cov = np.asarray(cov, dtype=float)
    c = np.array([], dtype=int) if c is None else np.asarray(c, dtype=int)
    ab = np.concatenate([a, b])
    S = cov[np.ix_(ab, ab)]
    if c.size:
        Scc = cov[np.ix_(c, c)]
        _logdet_checked(Scc, names[2])
        Sabc = cov[np.ix_(ab, c)]
        S = S - Sabc @ np.linalg.solve(Scc, Sabc.T)
    na = len(a)
    cond = f"|{names[2]}" if c.size else ""
    la = _logdet_checked(S[:na, :na], f"Sigma_{names[0]}{cond}")
    lb = _logdet_checked(S[na:, na:], f"Sigma_{names[1]}{cond}")
    lab = _logdet_checked(S, f"Sigma_{names[0]}{names[1]}{cond}")
    return 0.5 * (la + lb - lab)


def gaussian_info(g: GaussianTriple, a: str, b: str, given: str = "") -> InfoValue:
    """``I(a; b | given)`` for a :class:`GaussianTriple` via log-determinants."""
    A, B, C = _axes(a), _axes(b), _axes(given)
    if not A or not B or set(A) & set(B) or set(C) & (set(A) | set(B)):
        raise InvalidArgument("invalid Gaussian information query")
    zero = np.abs(g.cov[np.ix_(g.index(a), g.index(b))]).max() == 0.0 and not C
    if zero:
        return InfoValue(0.0)
    val = gaussian_mi_cov(g.cov, g.index(a), g.index(b), g.index(given) if C else None,
                          names=(a, b, given))
    return InfoValue(max(val, 0.0))


def whitened(g: GaussianTriple) -> GaussianTriple:
    """Same model after the transform of M making ``Sigma_M = I``."""
    dM = g.dims[0]
    w, V = np.linalg.eigh(g.block("M", "M"))
    Winv = V @ np.diag(w ** -0.5) @ V.T
    T = np.eye(sum(g.dims))
    T[:dM, :dM] = Winv
    return GaussianTriple(g.dims, T @ g.cov @ T.T)


def extend_with_extractor(g: GaussianTriple, H: np.ndarray) -> Tuple[np.ndarray, dict]:
    """Joint covariance of (T, M, X, Y) for ``T = H M' + N(0, I)`` with M' whitened M.

    Returns the covariance and a dict of index arrays for blocks T, M, X, Y.
    """
    gw = whitened(g)
    H = np.atleast_2d(np.asarray(H, dtype=float))
    t = H.shape[0]
    dM = g.dims[0]
    n = sum(g.dims)
    C = np.zeros((t + n, t + n))
    C[t:, t:] = gw.cov
    # Cov(T, .) = H Cov(M', .)
    cross = H @ gw.cov[:dM, :]
    C[:t, t:] = cross
    C[t:, :t] = cross.T
    C[:t, :t] = H @ H.T + np.eye(t)
    idx = {"T": np.arange(t)}
    for v in "MXY":
        idx[v] = t + gw.index(v)
    return C, idx
