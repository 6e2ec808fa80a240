"""Exact posteriors for post-treatment effects under Gaussian violation priors.

Two independent routes are provided:

* :func:`posterior_closed_form` follows the block formulas (shrink the
  pre-period coefficients, propagate through the prior regression of
  post-period violations on pre-period ones, then correct the post-period
  estimates through the sampling covariance);
* :func:`posterior_information_form` solves the joint linear-Gaussian model
  for ``(delta_pre, delta_post, tau_post)`` in precision form, where a flat
  prior on ``tau_post`` is simply a zero precision block.

With a flat prior on ``tau_post`` the two must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg, special

from ._linalg import chol_solve, symmetrize, try_cholesky
from .errors import (
    BadLevel,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularPosteriorPrecision,
    SingularPrior,
)
from .model import EventStudy, GaussianPrior, Intervals, PosteriorSummary, split_covariance


@dataclass(frozen=True)
class FlatTau:
    """Improper uniform prior on ``tau_post``."""


@dataclass(frozen=True, eq=False)
class GaussianTau:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = symmetrize(np.atleast_2d(np.asarray(self.cov, dtype=float)))
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"tau prior cov has shape {cov.shape}, mean has length {mean.size}")
        if try_cholesky(cov) is None:
            raise NotPositiveDefinite("tau prior covariance must be positive definite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


TauPriorSpec = FlatTau | GaussianTau


@dataclass(frozen=True, eq=False)
class JointPosterior:
    """Posterior of the stacked vector ``(delta_pre, delta_post, tau_post)``."""

    mean: np.ndarray
    cov: np.ndarray
    n_pre: int
    n_post: int

    @property
    def _tau(self):
        return slice(self.n_pre + self.n_post, self.n_pre + 2 * self.n_post)

    @property
    def tau_mean(self) -> np.ndarray:
        return self.mean[self._tau]

    @property
    def tau_cov(self) -> np.ndarray:
        s = self._tau
        return self.cov[s, s]

    def to_summary(self) -> PosteriorSummary:
        k = self.n_pre
        return PosteriorSummary(
            tau_mean=self.tau_mean.copy(),
            tau_cov=symmetrize(self.tau_cov),
            delta_post_mean=self.mean[k : k + self.n_post].copy(),
            beta_pre_star=self.mean[:k].copy(),
        )


def _check_prior(es: EventStudy, prior: GaussianPrior):
    if prior.dim != es.n_pre + es.n_post:
        raise DimensionMismatch(
            f"prior has dimension {prior.dim}, event study has {es.n_pre + es.n_post} coefficients"
        )


def posterior_closed_form(es: EventStudy, prior: GaussianPrior, allow_singular: bool = False) -> PosteriorSummary:
    """Posterior of ``tau_post`` under a flat prior on ``tau_post``.

    The pre-period prior block must be positive definite.  With
    ``allow_singular=True`` a merely PSD block is accepted and handled in
    covariance form with a pseudo-inverse regression; this covers degenerate
    priors such as a deterministic linear trend.
    """
    _check_prior(es, prior)
    s_pre, s_post, s_pp = split_covariance(es)
    mu_pre, mu_post, v_pre, v_post, v_pp = prior.blocks(es.n_pre)
    b_pre, b_post = es.beta_pre, es.beta_post

    ls = try_cholesky(s_pre)
    gamma_s = chol_solve(ls, s_pp)
    lv = try_cholesky(v_pre)
    if lv is not None:
        beta_pre_star, w, gamma_v = _update_pre_precision(ls, lv, v_pp, b_pre, mu_pre)
    elif allow_singular:
        beta_pre_star, w, gamma_v = _update_pre_covariance(s_pre, v_pre, v_pp, b_pre, mu_pre)
    else:
        raise SingularPrior("pre-period block of the prior covariance is not positive definite")

    beta_post_star = b_post - gamma_s.T @ (b_pre - beta_pre_star)
    delta_post_mean = mu_post + gamma_v.T @ (beta_pre_star - mu_pre)
    tau_mean = beta_post_star - delta_post_mean

    s_cond = s_post - s_pp.T @ gamma_s
    v_cond = v_post - v_pp.T @ gamma_v
    d = gamma_s - gamma_v
    tau_cov = symmetrize(s_cond + v_cond + d.T @ symmetrize(w) @ d)
    return PosteriorSummary(
        tau_mean=tau_mean,
        tau_cov=tau_cov,
        delta_post_mean=delta_post_mean,
        beta_pre_star=beta_pre_star,
    )


def _update_pre_precision(ls, lv, v_pp, b_pre, mu_pre):
    """Shrunk pre-period mean, its posterior covariance ``W`` and the prior
    regression ``Gamma_V``, from Cholesky factors of ``Sigma_pre`` and
    ``V_pre``."""
    eye = np.eye(b_pre.size)
    gamma_v = chol_solve(lv, v_pp)
    lp = try_cholesky(symmetrize(chol_solve(ls, eye) + chol_solve(lv, eye)))
    w = chol_solve(lp, eye)
    beta_pre_star = chol_solve(lp, chol_solve(ls, b_pre) + chol_solve(lv, mu_pre))
    return beta_pre_star, w, gamma_v


def _update_pre_covariance(s_pre, v_pre, v_pp, b_pre, mu_pre):
    """Same quantities for a PSD ``V_pre``, with a pseudo-inverse regression."""
    gain = chol_solve(try_cholesky(v_pre + s_pre), v_pre).T  # V (V + S)^-1
    beta_pre_star = mu_pre + gain @ (b_pre - mu_pre)
    w = v_pre - gain @ v_pre
    gamma_v = linalg.pinvh(v_pre, rtol=1e-12) @ v_pp
    return beta_pre_star, w, gamma_v


def observation_matrix(n_pre: int, n_post: int) -> np.ndarray:
    """``A`` with ``beta = A @ (delta_pre, delta_post, tau_post)``."""
    n = n_pre + n_post
    a = np.zeros((n, n + n_post))
    a[:, :n] = np.eye(n)
    a[n_pre:, n:] = np.eye(n_post)
    return a


def posterior_information_form(
    es: EventStudy, prior: GaussianPrior, tau_prior: TauPriorSpec = FlatTau()
) -> JointPosterior:
    _check_prior(es, prior)
    n_pre, n_post = es.n_pre, es.n_post
    n = n_pre + n_post
    a = observation_matrix(n_pre, n_post)

    ls = try_cholesky(es.sigma)
    precision = a.T @ chol_solve(ls, a)
    shift = a.T @ chol_solve(ls, es.beta)

    lv = try_cholesky(prior.cov)
    if lv is None:
        raise SingularPosteriorPrecision(
            "prior covariance of the violations is singular; its precision is undefined"
        )
    precision[:n, :n] += chol_solve(lv, np.eye(n))
    shift[:n] += chol_solve(lv, prior.mean)

    if isinstance(tau_prior, GaussianTau):
        if tau_prior.mean.size != n_post:
            raise DimensionMismatch(f"tau prior has dimension {tau_prior.mean.size}, expected {n_post}")
        lt = try_cholesky(tau_prior.cov)
        precision[n:, n:] += chol_solve(lt, np.eye(n_post))
        shift[n:] += chol_solve(lt, tau_prior.mean)
    elif not isinstance(tau_prior, FlatTau):
        raise TypeError(f"not a tau prior: {tau_prior!r}")

    lp = try_cholesky(symmetrize(precision))
    if lp is None:
        raise SingularPosteriorPrecision("posterior precision is not positive definite")
    mean = chol_solve(lp, shift)
    cov = symmetrize(chol_solve(lp, np.eye(n + n_post)))
    return JointPosterior(mean, cov, n_pre, n_post)


def normal_quantile(p):
    return special.ndtri(p)


def credible_set(ps: PosteriorSummary, level: float) -> Intervals:
    """Equal-tailed marginal interval for each post period."""
    if not (isinstance(level, (int, float, np.floating)) and 0.0 < level < 1.0):
        raise BadLevel(f"level must lie in (0, 1), got {level!r}")
    z = normal_quantile((1.0 + level) / 2.0)
    half = z * ps.tau_sd
    return Intervals(float(level), ps.tau_mean - half, ps.tau_mean + half)


def with_intervals(ps: PosteriorSummary, level: float) -> PosteriorSummary:
    return replace(ps, intervals=credible_set(ps, level))


def posterior(es: EventStudy, prior: GaussianPrior, level: float = 0.95, allow_singular: bool = True) -> PosteriorSummary:
    """Closed-form posterior with credible intervals attached."""
    return with_intervals(posterior_closed_form(es, prior, allow_singular=allow_singular), level)
