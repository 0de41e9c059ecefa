import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pidkit.lp import INFEASIBLE, UNBOUNDED, linprog, transport_vertex

scipy_opt = pytest.importorskip("scipy.optimize")


def _random_lp(rng, n, m_ub, m_eq):
    c = rng.normal(size=n)
    A_ub = rng.normal(size=(m_ub, n)) if m_ub else None
    x0 = rng.uniform(0, 1, size=n)
    b_ub = A_ub @ x0 + rng.uniform(0, 1, size=m_ub) if m_ub else None
    A_eq = rng.normal(size=(m_eq, n)) if m_eq else None
    b_eq = A_eq @ x0 if m_eq else None
    # keep it bounded
    A_box = np.eye(n)
    A_ub = A_box if A_ub is None else np.vstack([A_ub, A_box])
    b_ub = np.full(n, 5.0) if b_ub is None else np.concatenate([b_ub, np.full(n, 5.0)])
    return c, A_ub, b_ub, A_eq, b_eq


@given(st.integers(0, 2**31 - 1), st.integers(2, 8), st.integers(0, 5), st.integers(0, 3))
def test_matches_highs(seed, n, m_ub, m_eq):
    rng = np.random.default_rng(seed)
    m_eq = min(m_eq, n - 1)
    c, A_ub, b_ub, A_eq, b_eq = _random_lp(rng, n, m_ub, m_eq)
    ours = linprog(c, A_ub, b_ub, A_eq, b_eq)
    ref = scipy_opt.linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert ref.status == 0
    assert ours.success
    assert ours.fun == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(ours.x >= -1e-9)
    assert np.abs(A_ub @ ours.x - b_ub).max() < 1e9 and np.all(A_ub @ ours.x <= b_ub + 1e-7)


def test_infeasible_and_unbounded():
    r = linprog(np.ones(2), A_eq=np.array([[1.0, 1.0]]), b_eq=np.array([-1.0]))
    assert r.status == INFEASIBLE
    r = linprog(np.array([-1.0, 0.0]), A_ub=np.array([[0.0, 1.0]]), b_ub=np.array([1.0]))
    assert r.status == UNBOUNDED


def test_degenerate_cycling_example():
    # Beale's example cycles under naive Dantzig pricing
    c = np.array([-0.75, 150, -0.02, 6])
    A = np.array([[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]])
    b = np.array([0, 0, 1.0])
    r = linprog(c, A, b)
    assert r.success
    assert r.fun == pytest.approx(-0.05)


@given(st.integers(0, 2**31 - 1), st.integers(1, 5), st.integers(1, 5))
def test_transport_vertex_optimal(seed, r, k):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(r))
    b = rng.dirichlet(np.ones(k))
    cost = rng.normal(size=(r, k))
    S = transport_vertex(cost, a, b)
    assert np.allclose(S.sum(axis=1), a, atol=1e-9)
    assert np.allclose(S.sum(axis=0), b, atol=1e-9)
    A_eq = np.vstack([np.kron(np.eye(r), np.ones(k)), np.kron(np.ones(r), np.eye(k))])
    ref = scipy_opt.linprog(cost.ravel(), A_eq=A_eq, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    assert float(np.sum(cost * S)) == pytest.approx(ref.fun, abs=1e-9)
