"""Solver configuration shared by every optimizer in the package."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances, iteration caps and randomness for the PID solvers.

    ``tol`` is an objective tolerance in bits. ``t_cap`` and ``t_rank`` default
    to values derived from the distribution (``kM + 1`` and ``dM``).
    """

    tol: float = 1e-9
    max_iter: int = 100_000
    window: int = 50
    restarts: int = 16
    seed: int = 42
    lam: Optional[float] = None
    t_cap: Optional[int] = None
    t_rank: Optional[int] = None
    gauss_scale_cap: float = 1e6
    threads: Optional[int] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")
        if self.t_cap is not None and self.t_cap < 1:
            raise ValueError("t_cap must be >= 1")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lambda must be >= 0")

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)

    def n_threads(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        env = os.environ.get("PIDKIT_THREADS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                pass
        return os.cpu_count() or 1

    def as_dict(self) -> dict:
        return asdict(self)
