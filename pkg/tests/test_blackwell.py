import numpy as np
import pytest
from hypothesis import given

from pidkit import fixtures
from pidkit.blackwell import (
    LambdaPair, lambda_matrices, lecam_deficiency, lecam_witness, psd_min_eig, sufficiency_discrete,
    sufficiency_gaussian,
)
from pidkit.prob import Channel, GaussianTriple, compose, gaussian_info
from oracles import lecam_grid, lecam_highs
from strategies import channels, seeds


def test_identity_is_sufficient_for_anything(rng):
    py = Channel(fixtures.random_channel(rng, 3, 4))
    v = sufficiency_discrete(Channel.identity(4), py)
    assert v.sufficient and v.residual <= 1e-7
    assert np.allclose(v.witness.kernel, py.kernel, atol=1e-7)


@given(channels())
def test_garbling_is_sufficient(px):
    py = compose(Channel.bsc(0.3), Channel(px.kernel[:2] / px.kernel[:2].sum(axis=0)))
    base = Channel(px.kernel[:2] / px.kernel[:2].sum(axis=0))
    v = sufficiency_discrete(base, py)
    assert v.sufficient and v.residual <= 1e-7
    assert np.allclose(compose(v.witness, base).kernel, py.kernel, atol=1e-7)


def test_xor_pair_versus_single():
    d = fixtures.xor()
    pxy = Channel((d.pmf / d.p_m[:, None, None]).reshape(2, 4).T)
    px = d.channel("X", "M")
    assert sufficiency_discrete(pxy, px).sufficient
    # X alone says nothing about M but so does Y; (X, Y) is strictly more informative
    v = sufficiency_discrete(px, pxy)
    assert not v.sufficient and v.residual > 1e-3


@given(seeds)
def test_reflexive_transitive(seed):
    rng = np.random.default_rng(seed)
    a = Channel(fixtures.random_channel(rng, 3, 3))
    b = compose(Channel(fixtures.random_channel(rng, 3, 3)), a)
    c = compose(Channel(fixtures.random_channel(rng, 2, 3)), b)
    assert sufficiency_discrete(a, a).sufficient
    assert sufficiency_discrete(a, b).sufficient
    assert sufficiency_discrete(b, c).sufficient
    assert sufficiency_discrete(a, c).sufficient


def test_lecam_examples():
    ident = Channel.identity(2)
    const = Channel(np.ones((1, 2)))
    assert lecam_deficiency(ident, const) == pytest.approx(0.5, abs=1e-9)
    assert lecam_deficiency(compose(Channel.bsc(0.2), ident), ident) == pytest.approx(0, abs=1e-9)


@given(seeds)
def test_lecam_matches_grid(seed):
    rng = np.random.default_rng(seed)
    px = fixtures.random_channel(rng, 2, 3)
    py = fixtures.random_channel(rng, 2, 3)
    ours = lecam_deficiency(Channel(px), Channel(py))
    ref, step = lecam_grid(px, py)
    assert ours <= ref + 1e-9
    assert ours >= ref - step - 1e-9


@given(seeds)
def test_lecam_matches_highs(seed):
    rng = np.random.default_rng(seed)
    px = fixtures.random_channel(rng, 3, 3)
    py = fixtures.random_channel(rng, 3, 3)
    assert lecam_deficiency(Channel(px), Channel(py)) == pytest.approx(lecam_highs(px, py), abs=1e-8)


@given(seeds)
def test_lecam_zero_iff_sufficient(seed):
    rng = np.random.default_rng(seed)
    py = Channel(fixtures.random_channel(rng, 3, 3))
    if rng.uniform() < 0.5:
        px = compose(Channel(fixtures.random_channel(rng, 3, 3)), py)
    else:
        px = Channel(fixtures.random_channel(rng, 3, 3, alpha=0.3))
    value, K = lecam_witness(px, py)
    suff = sufficiency_discrete(py, px).sufficient
    assert (value <= 1e-7) == suff


def test_lambda_examples():
    indep = GaussianTriple((1, 1, 1), np.eye(3))
    assert np.allclose(lambda_matrices(indep).lambda_x, 0)
    for s2 in (0.25, 1.0, 4.0):
        g = fixtures.scalar_gaussian(1 / s2, 1.0)
        lam = lambda_matrices(g).lambda_x[0, 0]
        # I(M;X) = 1/2 log(1 + Lambda) with the information-form Lambda
        assert lam == pytest.approx(2 ** (2 * gaussian_info(g, "M", "X").bits) - 1)
        assert lam == pytest.approx(1 / s2)
    cov = np.ones((3, 3)) + np.diag([0, 0.5, 0.5])
    cov[1, 2] = cov[2, 1] = 1.5
    same = GaussianTriple((1, 1, 1), cov)
    L = lambda_matrices(same)
    assert np.array_equal(L.lambda_x, L.lambda_y)


@given(seeds)
def test_lambda_symmetric_psd(seed):
    g = fixtures.random_gaussian(np.random.default_rng(seed), (2, 2, 3))
    L = lambda_matrices(g)
    for A in (L.lambda_x, L.lambda_y):
        assert np.abs(A - A.T).max() <= 1e-9
        assert psd_min_eig(A) >= -1e-9


def test_gaussian_order_examples():
    g = fixtures.scalar_gaussian(4.0, 1.0)  # X less noisy
    assert sufficiency_gaussian(g, "X>=Y") and not sufficiency_gaussian(g, "Y>=X")
    g = fixtures.scalar_gaussian(2.0, 2.0)
    assert sufficiency_gaussian(g, "X>=Y") and sufficiency_gaussian(g, "Y>=X")
    g = fixtures.gaussian_from_lambdas(np.diag([3.0, 0.5]), np.diag([0.5, 3.0]))
    assert not sufficiency_gaussian(g, "X>=Y") and not sufficiency_gaussian(g, "Y>=X")


@given(seeds)
def test_nested_gaussian_is_ordered(seed):
    g = fixtures.nested_gaussian(np.random.default_rng(seed), (2, 2, 2))
    assert sufficiency_gaussian(g, "Y>=X")


@pytest.mark.parametrize("snr_x, snr_y", [(2.0, 0.5), (0.7, 0.7), (0.5, 1.5)])
def test_gaussian_matches_discretised(snr_x, snr_y):
    """Coarse quantisation of M and fine quantisation of the outputs keeps the scalar order."""
    ms = np.linspace(-1, 1, 3)
    pm = np.exp(-ms**2 / 2)
    pm /= pm.sum()
    out = np.linspace(-6, 6, 25)

    def chan(snr):
        s = 1 / np.sqrt(snr)
        k = np.exp(-(out[:, None] - ms[None, :]) ** 2 / (2 * s * s))
        return Channel(k / k.sum(axis=0))

    cx, cy = chan(snr_x), chan(snr_y)
    g = fixtures.scalar_gaussian(snr_x, snr_y)
    if sufficiency_gaussian(g, "X>=Y"):
        assert sufficiency_discrete(cx, cy).sufficient
    if not sufficiency_gaussian(g, "Y>=X"):
        assert not sufficiency_discrete(cy, cx).sufficient


def test_lambda_pair_type():
    assert LambdaPair(np.eye(1), np.eye(1)).lambda_x.shape == (1, 1)
