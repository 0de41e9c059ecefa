import math

import numpy as np
import pytest
from hypothesis import given, settings

from pidkit import fixtures
from pidkit.config import SolverConfig
from pidkit.prob import Channel, DiscreteTriple, InvalidArgument
from pidkit.risk import DecisionRule, LossTable, average_risk, bayes_rule, g_pinsker, per_message_risk, risk_gap_audit
from strategies import seeds, triples

CFG = SolverConfig(threads=1)


def test_loss_table_validation():
    with pytest.raises(InvalidArgument):
        LossTable(np.array([[1.5, 0.0]]))
    with pytest.raises(InvalidArgument):
        LossTable(np.zeros(3))
    assert LossTable(np.array([[1 + 1e-13, -1.0]])).oscillation == pytest.approx(2.0)


def test_average_risk_examples():
    ident = Channel.identity(3)
    prior = np.full(3, 1 / 3)
    rule = DecisionRule(Channel.identity(3))
    assert average_risk(ident, rule, LossTable(np.zeros((3, 3))), prior) == 0
    assert average_risk(ident, rule, LossTable.zero_one(3), prior) == 0
    # AND: estimate M from X with the majority (lowest-index on ties) rule
    d = fixtures.and_()
    obs = d.channel("X", "M")
    majority = DecisionRule(Channel(np.array([[1.0, 1.0], [0.0, 0.0]])))
    assert average_risk(obs, majority, LossTable.zero_one(2), d.p_m) == pytest.approx(0.25)
    _, r = bayes_rule(obs, LossTable.zero_one(2), d.p_m)
    assert r == pytest.approx(0.25)


def test_bayes_examples():
    _, r = bayes_rule(Channel.identity(4), LossTable.zero_one(4), np.full(4, 0.25))
    assert r == 0
    for k in (2, 3, 5):
        _, r = bayes_rule(Channel(np.ones((1, k))), LossTable.zero_one(k), np.full(k, 1 / k))
        assert r == pytest.approx(1 - 1 / k)


def test_size_mismatch():
    with pytest.raises(InvalidArgument):
        per_message_risk(Channel.identity(2), DecisionRule(Channel.identity(3)), LossTable.zero_one(3))


def test_zero_probability_observation_flagged():
    obs = Channel(np.array([[1.0, 1.0], [0.0, 0.0]]))
    rule, _ = bayes_rule(obs, LossTable.zero_one(2), [0.5, 0.5])
    assert rule.flagged == (1,)


@settings(max_examples=15)
@given(seeds)
def test_bayes_beats_random_rules(seed):
    rng = np.random.default_rng(seed)
    kM, kO, kA = 3, 4, 3
    obs = Channel(fixtures.random_channel(rng, kO, kM))
    loss = LossTable.random(rng, kA, kM)
    prior = rng.dirichlet(np.ones(kM))
    _, best = bayes_rule(obs, loss, prior)
    for _ in range(1000):
        alpha = rng.choice([0.1, 1.0])
        rule = DecisionRule(Channel(fixtures.random_channel(rng, kA, kO, alpha)))
        assert best <= average_risk(obs, rule, loss, prior) + 1e-12


def test_audit_identical_channels():
    rep = risk_gap_audit(fixtures.copy(), CFG, n_losses=10, seed=1)
    assert rep.max_violation <= 1e-9
    assert all(abs(r["risk_gap"]) <= 1e-12 for r in rep.rows)


def test_audit_copy_constant_y():
    rep = risk_gap_audit(fixtures.copy_const_y(), CFG, n_losses=0, seed=1)
    zero_one = [r for r in rep.rows if r["loss"] == 0]
    by_side = {r["side"]: r for r in zero_one}
    # Y (constant) is the worse observation: R_Y - R_X = 0.5
    assert by_side["Y"]["risk_gap"] == pytest.approx(0.5)
    assert by_side["Y"]["bound"] == pytest.approx(math.sqrt(math.log(2) / 2), abs=1e-6)
    assert rep.ok()


def test_signed_loss_needs_oscillation():
    """With losses in [-1, 1] the Pinsker bound must be scaled by the oscillation."""
    loss = LossTable(np.array([[-1.0, 1.0], [1.0, -1.0]]))
    rep = risk_gap_audit(fixtures.copy_const_y(), CFG, n_losses=0, seed=1, losses=[loss])
    row = [r for r in rep.rows if r["loss"] == 1 and r["side"] == "Y"][0]
    assert row["risk_gap"] == pytest.approx(1.0)
    assert row["violation"] > 0.4
    assert rep.max_violation_osc <= 1e-9


@settings(max_examples=10)
@given(triples())
def test_audit_random(dist):
    rep = risk_gap_audit(dist, CFG, n_losses=10, seed=0)
    # the unscaled bound needs range <= 1, which only the 0-1 loss (index 0) guarantees
    assert max(r["violation"] for r in rep.rows if r["loss"] == 0) <= 1e-9
    assert rep.max_violation_osc <= 1e-9
    assert rep.lecam_max_violation <= 1e-9
    assert set(rep.deficiency_bits) == {"Y\\X", "X\\Y"}
    assert rep.deficiency_bits["Y\\X"] == pytest.approx(rep.deficiency_nats["Y\\X"] / math.log(2))


def test_g():
    assert g_pinsker(0.0) == 0
    assert g_pinsker(2.0) == 1.0
    assert g_pinsker(-1e-15) == 0
