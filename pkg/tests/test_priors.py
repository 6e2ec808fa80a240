import numpy as np
import pytest
from hypothesis import given, strategies as st

from bayestrends import AR1, RandomWalk, ar1_prior, differencing_matrix, random_walk_prior
from bayestrends.errors import BadRho, NegativeVariance
from bayestrends.oracle import mc_prior_moments, simulate_prior_paths
from bayestrends.priors import prior_spec_from_dict, prior_spec_to_dict


def test_differencing_matrix_examples():
    np.testing.assert_array_equal(differencing_matrix(1), [[-1.0]])
    np.testing.assert_array_equal(differencing_matrix(3), [[-1, 1, 0], [0, -1, 1], [0, 0, -1]])


@given(st.integers(1, 30))
def test_differencing_telescopes(n):
    out = differencing_matrix(n) @ np.ones(n)
    expected = np.zeros(n)
    expected[-1] = -1.0
    np.testing.assert_array_equal(out, expected)


def test_random_walk_example():
    p = random_walk_prior(0.1, 1.0, 2, 2)
    np.testing.assert_allclose(p.mean, [-0.2, -0.1, 0.1, 0.2])
    np.testing.assert_array_equal(np.diag(p.cov), [2, 1, 1, 2])
    assert p.cov[0, 1] == 1.0
    assert p.cov[1, 2] == 0.0
    assert p.cov[2, 3] == 1.0


def test_random_walk_deterministic_trend():
    p = random_walk_prior(0.3, 0.0, 3, 2)
    np.testing.assert_array_equal(p.cov, 0.0)
    np.testing.assert_allclose(p.mean, 0.3 * np.array([-3, -2, -1, 1, 2]))


def test_random_walk_negative_variance():
    with pytest.raises(NegativeVariance):
        random_walk_prior(0.0, -1e-3, 2, 2)


def test_random_walk_matches_simulated_paths():
    # 3 Monte Carlo standard errors, entrywise
    p = random_walk_prior(0.0, 2.0, 3, 3)
    m = mc_prior_moments(RandomWalk(0.0, 2.0), 3, 3, 200_000, seed=11)
    assert np.all(np.abs(m.mean - p.mean) <= 3 * m.mean_se)
    assert np.all(np.abs(m.cov - p.cov) <= 3 * m.cov_se)


@given(st.floats(-2, 2), st.floats(0, 5), st.integers(1, 6), st.integers(1, 6))
def test_random_walk_psd(mu, sigma2, n_pre, n_post):
    p = random_walk_prior(mu, sigma2, n_pre, n_post)
    assert np.linalg.eigvalsh(p.cov)[0] >= -1e-10 * max(1.0, sigma2)
    if sigma2 > 1e-6:
        for block in (p.cov[:n_pre, :n_pre], p.cov[n_pre:, n_pre:]):
            np.linalg.cholesky(block)


def test_ar1_examples():
    p = ar1_prior(0.5, 0.75, 2, 2)  # stationary variance 1
    # periods -2, -1, 1, 2 -> indices 0..3
    assert p.cov[2, 2] == pytest.approx(0.75, abs=1e-15)
    assert p.cov[1, 2] == pytest.approx(0.0, abs=1e-15)
    assert p.cov[2, 3] == pytest.approx(0.375, abs=1e-15)
    np.testing.assert_array_equal(p.mean, 0.0)


def test_ar1_white_noise():
    p = ar1_prior(0.0, 0.7, 3, 2)
    np.testing.assert_allclose(p.cov, 0.7 * np.eye(5), atol=1e-15)


def test_ar1_covariance_matches_rejection_sampling():
    # stationary paths kept when |delta_0| < 1e-2, 1e6 simulated
    m = mc_prior_moments(AR1(0.5, 0.75), 1, 2, 1_000_000, seed=5, method="rejection")
    assert m.n > 5000
    assert abs(m.cov[1, 2] - 0.375) <= 3 * m.cov_se[1, 2]


def test_ar1_matches_exact_conditional_sampling():
    p = ar1_prior(0.5, 0.75, 3, 3)
    m = mc_prior_moments(AR1(0.5, 0.75), 3, 3, 200_000, seed=7)
    assert np.all(np.abs(m.cov - p.cov) <= 3 * m.cov_se)


@pytest.mark.parametrize("rho", [-0.9, -0.5, 0.0, 0.5, 0.9])
def test_ar1_positive_definite_sweep(rho):
    np.linalg.cholesky(ar1_prior(rho, 1.3, 6, 6).cov)


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
def test_ar1_bad_rho(rho):
    with pytest.raises(BadRho):
        ar1_prior(rho, 1.0, 2, 2)


def test_ar1_bad_variance():
    with pytest.raises(NegativeVariance):
        ar1_prior(0.3, 0.0, 2, 2)


def test_differencing_recovers_increments():
    mu, sigma2, n_pre = -0.3, 0.5, 8
    rng = np.random.default_rng(2)
    paths = simulate_prior_paths(RandomWalk(mu, sigma2), n_pre, 1, 100_000, rng)
    w = paths[:, :n_pre] @ differencing_matrix(n_pre).T
    n = w.size  # increments are iid across rows and columns
    assert abs(w.mean() - mu) < 3 * np.sqrt(sigma2 / n)
    assert abs(w.var() - sigma2) < 3 * sigma2 * np.sqrt(2.0 / n)


@pytest.mark.parametrize(
    "doc",
    [
        {"type": "random_walk", "mu": 0.1, "sigma2": 0.5},
        {"type": "ar1", "rho": 0.4, "sigma_eps2": 1.0},
        {"type": "explicit", "mean": [0.0, 1.0], "cov": [[1.0, 0.2], [0.2, 1.0]]},
    ],
)
def test_prior_spec_round_trip(doc):
    assert prior_spec_to_dict(prior_spec_from_dict(doc)) == doc
