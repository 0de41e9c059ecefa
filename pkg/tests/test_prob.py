import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pidkit import fixtures
from pidkit.prob import (
    LN2, Channel, DiscreteTriple, GaussianTriple, InfoValue, InvalidArgument, SingularModelError,
    compose, conditional_channel, expected_kl, extend_with_extractor, gaussian_info, gaussian_mi_cov,
    interaction_information, marginalize, mutual_information,
)
from oracles import binary_entropy, mi_bits
from strategies import channels, triples


def test_info_value_units():
    v = InfoValue.from_bits(2.5)
    assert v.nats == pytest.approx(2.5 * LN2)
    assert v.bits == 2.5
    assert InfoValue(float("inf")).is_infinite


@pytest.mark.parametrize("bad, msg", [
    (np.ones((2, 2)) / 4, "3-d"),
    (np.full((2, 2, 2), 0.99 / 8), "sums to"),
    (np.array([[[1.1, -0.1]]]), "negative"),
])
def test_triple_rejects(bad, msg):
    with pytest.raises(InvalidArgument, match=msg):
        DiscreteTriple(bad)


def test_gaussian_rejects():
    with pytest.raises(InvalidArgument, match="min eigenvalue"):
        GaussianTriple((1, 1, 1), np.array([[1, 2, 0], [2, 1, 0], [0, 0, 1.0]]))
    with pytest.raises(InvalidArgument, match="symmetric"):
        GaussianTriple((1, 1, 1), np.array([[1, 0.5, 0], [0, 1, 0], [0, 0, 1.0]]))


def test_marginals():
    u = DiscreteTriple(np.full((2, 2, 2), 1 / 8))
    assert np.allclose(marginalize(u, "M"), [0.5, 0.5])
    assert np.allclose(marginalize(fixtures.copy(), "MX"), np.diag([0.5, 0.5]))
    assert np.allclose(marginalize(fixtures.and_(), "M"), [0.75, 0.25])
    with pytest.raises(InvalidArgument):
        marginalize(u, "")


def test_conditional_channels():
    assert np.allclose(conditional_channel(fixtures.copy(), "X", "M").kernel, np.eye(2))
    assert np.allclose(conditional_channel(fixtures.xor(), "X", "M").kernel, 0.5)
    k = conditional_channel(fixtures.and_(), "M", "X").kernel
    assert np.allclose(k[:, 0], [1, 0]) and np.allclose(k[:, 1], [0.5, 0.5])


def test_degenerate_column_flagged():
    p = np.zeros((2, 3, 1))
    p[0, 0, 0] = 0.5
    p[1, 1, 0] = 0.5
    ch = conditional_channel(DiscreteTriple(p), "M", "X")
    assert ch.degenerate == (2,)
    assert np.allclose(ch.kernel[:, 2], 0.5)


@given(triples())
def test_channel_reproduces_joint(dist):
    ch = conditional_channel(dist, "X", "MY")
    pmy = marginalize(dist, "MY").reshape(-1)
    joint = ch.kernel * pmy  # (x, (m, y))
    ref = np.transpose(dist.pmf, (1, 0, 2)).reshape(dist.sizes[1], -1)
    assert np.allclose(joint, ref, atol=1e-9)


def test_compose():
    assert np.allclose(compose(Channel.bsc(0.1), Channel.bsc(0.2)).kernel, Channel.bsc(0.26).kernel)
    K = Channel(np.array([[0.2, 0.7, 0.5], [0.8, 0.3, 0.5]]))
    assert np.allclose(compose(Channel.identity(2), K).kernel, K.kernel)
    const = Channel.constant([0.25, 0.5, 0.25], 4)
    assert np.allclose(compose(K, const).kernel, (K.kernel @ [0.25, 0.5, 0.25])[:, None])
    with pytest.raises(InvalidArgument):
        compose(K, Channel.identity(2))


def test_mutual_information_examples():
    assert mutual_information(fixtures.independent(), "M", "X").bits == pytest.approx(0, abs=1e-12)
    assert mutual_information(fixtures.copy(), "M", "X").bits == pytest.approx(1)
    assert mutual_information(fixtures.and_(), "M", "X").bits == pytest.approx(binary_entropy(0.25) - 0.5)
    assert interaction_information(fixtures.xor()).bits == pytest.approx(-1)
    assert interaction_information(fixtures.independent()).bits == pytest.approx(0, abs=1e-12)


@given(triples())
def test_chain_rule(dist):
    lhs = mutual_information(dist, "M", "XY").nats
    rhs = mutual_information(dist, "M", "X").nats + mutual_information(dist, "M", "Y", "X").nats
    assert lhs == pytest.approx(rhs, abs=1e-9)


@given(triples())
def test_mi_bounds_and_oracle(dist):
    i = mutual_information(dist, "M", "X").bits
    pmx = marginalize(dist, "MX")
    assert i >= -1e-12
    assert i <= min(np.log2(pmx.shape[0]), np.log2(pmx.shape[1])) + 1e-9
    assert i == pytest.approx(mi_bits(pmx), abs=1e-9)


@given(triples())
def test_interaction_information_permutation_invariant(dist):
    ref = interaction_information(dist).nats
    for perm in itertools.permutations(range(3)):
        d = DiscreteTriple(np.transpose(dist.pmf, perm))
        assert interaction_information(d).nats == pytest.approx(ref, abs=1e-9)


def test_expected_kl_examples():
    p = Channel.identity(2)
    q = Channel(np.full((2, 2), 0.5))
    assert expected_kl(p, p, [0.5, 0.5]).nats == 0
    assert expected_kl(p, q, [0.5, 0.5]).bits == pytest.approx(1)
    assert expected_kl(p, Channel(np.array([[0.0, 0.0], [1.0, 1.0]])), [0.5, 0.5]).is_infinite
    # mismatch only on an input with zero prior mass
    assert expected_kl(p, Channel(np.array([[0.0, 0.0], [1.0, 1.0]])), [0.0, 1.0]).nats == 0


@given(channels(), st.floats(0.0, 0.3))
def test_expected_kl_zero_iff_equal(p, eps):
    k = p.kernel.copy()
    q = Channel((1 - eps) * k + eps * np.roll(k, 1, axis=0))
    prior = np.full(p.in_size, 1 / p.in_size)
    kl = expected_kl(p, q, prior).nats
    same = np.abs(p.kernel - q.kernel).max() <= 1e-7
    assert kl >= 0
    assert (kl <= 1e-12) == same or abs(kl) < 1e-10


def test_gaussian_info_closed_form():
    g = fixtures.scalar_gaussian(1.0, 1.0)
    assert gaussian_info(g, "M", "X").bits == pytest.approx(0.5)
    assert gaussian_info(g, "M", "Y").bits == pytest.approx(0.5)
    z = GaussianTriple((1, 1, 1), np.eye(3))
    assert gaussian_info(z, "M", "X").bits == pytest.approx(0, abs=1e-12)


def test_gaussian_singular_block_named():
    cov = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    g = GaussianTriple((1, 1, 1), cov)
    with pytest.raises(SingularModelError) as e:
        gaussian_info(g, "M", "Y", "X")
    assert e.value.block


def test_gaussian_matches_discretised_scalar():
    # M ~ N(0,1), X = M + N(0, 1): fine discretisation of (M, X)
    grid = np.linspace(-5, 5, 401)
    step = grid[1] - grid[0]
    pm = np.exp(-grid**2 / 2)
    px_m = np.exp(-(grid[None, :] - grid[:, None]) ** 2 / 2)  # [x, m]
    joint = px_m * pm[None, :]
    joint /= joint.sum()
    discrete = mi_bits(joint)
    g = fixtures.scalar_gaussian(1.0, 1.0)
    assert step < 0.03
    assert abs(gaussian_info(g, "M", "X").bits - discrete) < 0.02


def test_extractor_information_form(rng):
    """I(T;X) for T = H M' + N(0, I) in the Lambda parametrisation vs direct log-det."""
    from pidkit.blackwell import lambda_matrices

    g = fixtures.random_gaussian(rng, (2, 2, 2))
    H = rng.normal(size=(2, 2))
    cov, idx = extend_with_extractor(g, H)
    direct = gaussian_mi_cov(cov, idx["T"], idx["X"])
    lam = lambda_matrices(g).lambda_x
    P = H.T @ H
    I = np.eye(2)
    ld = lambda A: np.linalg.slogdet(A)[1]
    form = 0.5 * (ld(I + lam) + ld(I + P) - ld(I + P + lam))
    assert direct == pytest.approx(form, abs=1e-8)
