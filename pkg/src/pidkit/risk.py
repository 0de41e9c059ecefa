"""Decision problems on M observed through X or Y, Bayes rules and risk-gap audits.

A loss ``L[a, m]`` with ``|L| <= 1`` scores action a when the message is m.
If X can emulate Y up to deficiency ``d`` (nats), the Bayes risk from X
exceeds the one from Y by at most ``g(d) = sqrt(d / 2)`` for losses with
range at most one (Pinsker); for a loss with oscillation ``osc`` the same
argument gives ``osc * sqrt(d / 2)``. Both forms are audited.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._parallel import pmap
from .blackwell import lecam_witness
from .config import SolverConfig
from .delta import deficiency
from .prob import LN2, ZERO, Channel, DiscreteTriple, InvalidArgument

LOSS_TOL = 1e-12
VIOLATION_TOL = 1e-9
HARD_FAIL = 1e-6


def g_pinsker(z_nats: float) -> float:
    return math.sqrt(max(z_nats, 0.0) / 2.0)


@dataclass(frozen=True, eq=False)
class LossTable:
    values: np.ndarray  # (kA, kM)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise InvalidArgument(f"loss table must be 2-d (actions x messages), got shape {v.shape}")
        if not np.all(np.isfinite(v)) or np.abs(v).max() > 1 + LOSS_TOL:
            raise InvalidArgument("loss entries must be finite with |L| <= 1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_actions(self) -> int:
        return self.values.shape[0]

    @property
    def oscillation(self) -> float:
        return float(self.values.max() - self.values.min())

    @classmethod
    def zero_one(cls, k: int) -> "LossTable":
        return cls(1.0 - np.eye(k))

    @classmethod
    def random(cls, rng: np.random.Generator, n_actions: int, n_messages: int) -> "LossTable":
        return cls(rng.uniform(-1.0, 1.0, size=(n_actions, n_messages)))


@dataclass(frozen=True)
class DecisionRule:
    kernel: Channel  # action | observation

    @property
    def flagged(self) -> Tuple[int, ...]:
        """Observations with zero probability; their action is arbitrary."""
        return self.kernel.degenerate


def _check(obs: Channel, loss: LossTable, prior) -> np.ndarray:
    prior = np.asarray(prior, dtype=float)
    if prior.ndim != 1 or prior.size != obs.in_size:
        raise InvalidArgument(f"prior has {prior.size} entries, channel expects {obs.in_size}")
    if loss.values.shape[1] != obs.in_size:
        raise InvalidArgument(f"loss covers {loss.values.shape[1]} messages, channel has {obs.in_size}")
    if prior.min() < -ZERO or abs(prior.sum() - 1.0) > 1e-9:
        raise InvalidArgument("prior must be a probability vector")
    return prior


def per_message_risk(obs: Channel, rule: DecisionRule, loss: LossTable) -> np.ndarray:
    """``R_m = sum_o P(o|m) sum_a rule(a|o) L[a, m]`` for every m."""
    if rule.kernel.in_size != obs.out_size:
        raise InvalidArgument(f"rule reads {rule.kernel.in_size} observations, channel emits {obs.out_size}")
    if rule.kernel.out_size != loss.n_actions:
        raise InvalidArgument(f"rule has {rule.kernel.out_size} actions, loss has {loss.n_actions}")
    action_given_m = rule.kernel.kernel @ obs.kernel  # (a, m)
    return np.sum(action_given_m * loss.values, axis=0)


def average_risk(obs: Channel, rule: DecisionRule, loss: LossTable, prior) -> float:
    prior = _check(obs, loss, prior)
    return float(per_message_risk(obs, rule, loss) @ prior)


def bayes_rule(obs: Channel, loss: LossTable, prior) -> Tuple[DecisionRule, float]:
    """Deterministic rule minimising posterior expected loss, ties to the lowest action."""
    prior = _check(obs, loss, prior)
    joint = obs.kernel * prior  # (o, m)
    score = loss.values @ joint.T  # (a, o): unnormalised posterior loss
    p_o = joint.sum(axis=1)
    choice = np.argmin(score, axis=0)
    K = np.zeros((loss.n_actions, obs.out_size))
    K[choice, np.arange(obs.out_size)] = 1.0
    flagged = tuple(int(o) for o in np.flatnonzero(p_o <= ZERO))
    rule = DecisionRule(Channel(K, flagged))
    return rule, average_risk(obs, rule, loss, prior)


@dataclass
class AuditReport:
    g: str
    deficiency_nats: dict
    deficiency_bits: dict
    lecam: dict
    n_losses: int
    max_violation: float
    min_slack: float
    max_violation_osc: float
    lecam_max_violation: float
    offending: List[dict] = field(default_factory=list)
    rows: List[dict] = field(default_factory=list)

    def ok(self, tol: float = HARD_FAIL) -> bool:
        return self.max_violation <= tol

    def as_dict(self, verbose: bool = False) -> dict:
        d = {
            "g": self.g,
            "units": "deficiency in nats inside g; risks are raw loss units",
            "deficiency_nats": self.deficiency_nats,
            "deficiency_bits": self.deficiency_bits,
            "lecam": self.lecam,
            "n_losses": self.n_losses,
            "max_violation": self.max_violation,
            "min_slack": self.min_slack,
            "max_violation_osc": self.max_violation_osc,
            "lecam_max_violation": self.lecam_max_violation,
            "offending": self.offending,
        }
        if verbose:
            d["rows"] = self.rows
        return d


def risk_gap_audit(dist: DiscreteTriple, cfg: SolverConfig = SolverConfig(), n_losses: int = 20,
                   seed: Optional[int] = None, n_actions: Optional[int] = None,
                   losses: Optional[Sequence[LossTable]] = None) -> AuditReport:
    """Audit the deficiency risk bound in both directions on sampled losses.

    For each loss the Bayes risks from X and from Y are compared:
    ``R*_X - R*_Y <= g(delta(M:Y\\X))`` and ``R*_Y - R*_X <= g(delta(M:X\\Y))``.
    The 0-1 loss is always included. The per-message Le Cam form is checked on
    the 0-1 loss with the emulating rule ``Bayes_Y o K``.
    """
    seed = cfg.seed if seed is None else seed
    kM = dist.sizes[0]
    kA = kM if n_actions is None else int(n_actions)
    prior = dist.p_m
    px = dist.channel("X", "M")
    py = dist.channel("Y", "M")
    # "X" emulating "Y": delta(M:Y\X); "Y" emulating "X": delta(M:X\Y)
    d_ymx, d_xmy = pmap(lambda d: deficiency(dist, d, cfg), ("Y", "X"), cfg.n_threads())
    defs = {"Y\\X": d_ymx.value.nats, "X\\Y": d_xmy.value.nats}

    table: List[LossTable] = [LossTable.zero_one(kM)] if kA == kM else []
    if losses is not None:
        table += list(losses)
    rng = np.random.default_rng(seed)
    table += [LossTable.random(rng, kA, kM) for _ in range(n_losses)]

    max_v = -math.inf
    max_v_osc = -math.inf
    min_slack = math.inf
    offending, rows = [], []
    for i, L in enumerate(table):
        _, rx = bayes_rule(px, L, prior)
        _, ry = bayes_rule(py, L, prior)
        for side, gap, dnat in (("X", rx - ry, defs["Y\\X"]), ("Y", ry - rx, defs["X\\Y"])):
            bound = g_pinsker(dnat)
            v = gap - bound
            v_osc = gap - max(L.oscillation, 0.0) * bound
            max_v = max(max_v, v)
            max_v_osc = max(max_v_osc, v_osc)
            min_slack = min(min_slack, -v)
            row = {"loss": i, "side": side, "risk_gap": gap, "bound": bound, "violation": v}
            rows.append(row)
            if v > HARD_FAIL:
                offending.append(dict(row, values=L.values.tolist()))

    # Le Cam per-message form on the 0-1 loss
    L01 = LossTable.zero_one(kM)
    lecam = {}
    lecam_v = -math.inf
    for side, (obs_self, obs_other) in (("X", (px, py)), ("Y", (py, px))):
        # obs_self emulating obs_other: kernel other' | self
        value, K = lecam_witness(obs_other, obs_self)
        rule_other, _ = bayes_rule(obs_other, L01, prior)
        composed = DecisionRule(Channel(rule_other.kernel.kernel @ K.kernel))
        r_self = per_message_risk(obs_self, composed, L01)
        r_other = per_message_risk(obs_other, rule_other, L01)
        excess = float(np.max(r_self - r_other))
        lecam[side] = {"deficiency": value, "max_per_message_excess": excess}
        lecam_v = max(lecam_v, excess - 2 * value)

    return AuditReport(
        "sqrt(z/2), z in nats",
        defs,
        {k: v / LN2 for k, v in defs.items()},
        lecam,
        len(table),
        max_v,
        min_slack,
        max_v_osc,
        lecam_v,
        offending,
        rows,
    )
