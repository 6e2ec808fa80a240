"""Empirical and hierarchical Bayes for random-walk violations.

Increments ``w_t = delta_t - delta_{t-1}`` are iid ``N(mu, sigma2)``.  Their
estimates ``w_hat = M beta_pre`` are distributed ``N(mu 1, Sigma_w + sigma2 I)``
with ``Sigma_w = M Sigma_pre M'``.  The empirical-Bayes route plugs the MLE of
``(mu, sigma2)`` into the random-walk prior; the hierarchical route averages
over a grid hyper-prior instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize, special

from ._linalg import chol_logdet, chol_solve, symmetrize, try_cholesky
from .errors import (
    AllWeightsUnderflow,
    BadLevel,
    EmptyGrid,
    SchemaError,
    SingularOmega,
    TooFewPeriods,
    ValidationError,
)
from .gaussian import credible_set, posterior, posterior_closed_form
from .model import EventStudy, Intervals, PosteriorSummary, split_covariance
from .parallel import ordered_map
from .priors import differencing_matrix, random_walk_prior

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
LOG_2PI = math.log(2.0 * math.pi)


def increments(es: EventStudy):
    """``(w_hat, Sigma_w)`` for the pre-period coefficients."""
    m = differencing_matrix(es.n_pre)
    s_pre = split_covariance(es)[0]
    return m @ es.beta_pre, symmetrize(m @ s_pre @ m.T)


def log_likelihood(w_hat, sigma_w, mu, sigma2):
    """Gaussian log-likelihood of ``w_hat`` under ``N(mu 1, Sigma_w + sigma2 I)``."""
    k = w_hat.size
    chol = try_cholesky(sigma_w + sigma2 * np.eye(k))
    if chol is None:
        raise SingularOmega(f"Sigma_w + sigma2 I is not positive definite at sigma2={sigma2}")
    r = w_hat - mu
    return -0.5 * (k * LOG_2PI + chol_logdet(chol) + float(r @ chol_solve(chol, r)))


@dataclass(frozen=True)
class EbFit:
    mu_hat: float
    sigma2_hat: float
    log_likelihood: float
    converged: bool
    boundary: bool
    n_pre: int

    @property
    def sigma_hat(self) -> float:
        return math.sqrt(self.sigma2_hat)

    def to_dict(self) -> dict:
        return {
            "mu_hat": self.mu_hat,
            "sigma2_hat": self.sigma2_hat,
            "sigma_hat": self.sigma_hat,
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "boundary": self.boundary,
            "n_pre": self.n_pre,
        }


def _num(x, digits=2):
    s = f"{x:.{digits}f}"
    if s.startswith("-"):
        s = "−" + s[1:]
    return s


def format_fit(fit: EbFit, digits: int = 2) -> str:
    """One-line summary, e.g. ``μ̂ = −0.24, σ̂ = 0.61``."""
    return f"μ̂ = {_num(fit.mu_hat, digits)}, σ̂ = {_num(fit.sigma_hat, digits)}"


def describe_fit(fit: EbFit, units: str = "p.p.", digits: int = 2) -> str:
    return f"drift {_num(fit.mu_hat, digits)} {units}/period, innovation s.d. {_num(fit.sigma_hat, digits)}"


class _Profile:
    """Concentrated log-likelihood in ``sigma2`` via one eigendecomposition
    of ``Sigma_w``; ``mu`` is profiled out by GLS."""

    def __init__(self, w_hat, sigma_w):
        lam, q = np.linalg.eigh(sigma_w)
        if lam[0] <= 0.0:
            raise SingularOmega("Sigma_w is not positive definite")
        self.lam = lam
        self.z = q.T @ w_hat
        self.u = q.T @ np.ones(w_hat.size)
        self.k = w_hat.size

    def mu_hat(self, sigma2):
        d = self.lam + sigma2
        return float(np.sum(self.u * self.z / d) / np.sum(self.u * self.u / d))

    def score(self, sigma2):
        """Derivative of the concentrated log-likelihood in ``sigma2``."""
        d = self.lam + sigma2
        mu = float(np.sum(self.u * self.z / d) / np.sum(self.u * self.u / d))
        r = self.z - mu * self.u
        return -0.5 * (float(np.sum(1.0 / d)) - float(np.sum(r * r / (d * d))))

    def __call__(self, sigma2):
        d = self.lam + sigma2
        mu = float(np.sum(self.u * self.z / d) / np.sum(self.u * self.u / d))
        r = self.z - mu * self.u
        return -0.5 * (self.k * LOG_2PI + float(np.sum(np.log(d))) + float(np.sum(r * r / d)))


def _golden_max(f, a, b, to_sigma2, tol, max_iter=300):
    """Golden-section maximization of ``f`` on ``[a, b]`` (log scale).

    Stops once the bracket, mapped back to ``sigma2``, is narrower than
    ``tol``.  Returns ``(x, f(x), converged)``.
    """
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if to_sigma2(b) - to_sigma2(a) < tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        if not a < c < d < b:
            break
    width = to_sigma2(b) - to_sigma2(a)
    converged = width < tol or width <= 8 * np.spacing(max(to_sigma2(b), 1.0))
    x, fx = (c, fc) if fc >= fd else (d, fd)
    return x, fx, bool(converged)


def fit_random_walk_mle(es: EventStudy, tol: float = 1e-10, n_scan: int = 200) -> EbFit:
    """Maximum-likelihood drift and innovation variance from the pre-trends.

    The search runs on ``log(sigma2 + floor)`` over ``[0, sigma2_max]``: a
    coarse scan locates the best bracket and golden-section refines it.  A
    maximum at ``sigma2 = 0`` is reported as is, with ``boundary=True``.
    """
    if es.n_pre < 2:
        raise TooFewPeriods(f"need at least 2 pre-periods to fit (mu, sigma2), got {es.n_pre}")
    w_hat, sigma_w = increments(es)
    profile = _Profile(w_hat, sigma_w)

    sigma2_max = 100.0 * float(np.max(np.diag(sigma_w))) + float(np.var(w_hat, ddof=1))
    floor = 1e-10 * sigma2_max

    def to_sigma2(t):
        return max(math.exp(t) - floor, 0.0)

    def objective(t):
        return profile(to_sigma2(t))

    lo, hi = math.log(floor), math.log(sigma2_max + floor)
    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([objective(t) for t in grid])
    j = int(np.argmax(vals))
    a, b = grid[max(j - 1, 0)], grid[min(j + 1, n_scan - 1)]
    t_best, f_best, converged = _golden_max(objective, a, b, to_sigma2, tol)
    sigma2 = to_sigma2(t_best)

    # Comparisons of a flat objective stall near sqrt(eps) relative accuracy;
    # the score keeps full precision, so finish on its root when bracketed.
    s_lo, s_hi = to_sigma2(a), to_sigma2(b)
    if profile.score(s_lo) > 0.0 > profile.score(s_hi):
        root = optimize.brentq(profile.score, s_lo, s_hi, xtol=tol / 10, rtol=4 * np.finfo(float).eps)
        f_root = profile(root)
        if f_root >= f_best - 1e-12 * abs(f_best):
            sigma2, f_best, converged = root, f_root, True

    f_zero = profile(0.0)
    if f_zero >= f_best:
        sigma2, f_best = 0.0, f_zero
    mu = profile.mu_hat(sigma2)
    return EbFit(
        mu_hat=mu,
        sigma2_hat=sigma2,
        log_likelihood=log_likelihood(w_hat, sigma_w, mu, sigma2),
        converged=converged,
        boundary=sigma2 < 1e-12,
        n_pre=es.n_pre,
    )


def eb_posterior(es: EventStudy, level: float = 0.95):
    """Plug-in posterior: fit ``(mu, sigma2)`` then update with the implied prior.

    The pre-period coefficients are used twice, to fit the hyperparameters and
    to update the prior.
    """
    fit = fit_random_walk_mle(es)
    prior = random_walk_prior(fit.mu_hat, fit.sigma2_hat, es.n_pre, es.n_post)
    ps = posterior_closed_form(es, prior, allow_singular=True)
    return fit, replace(ps, intervals=credible_set(ps, level))


@dataclass(frozen=True, eq=False)
class HyperPriorGrid:
    mu_grid: np.ndarray
    sigma_grid: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu_grid, dtype=float))
        sd = np.atleast_1d(np.asarray(self.sigma_grid, dtype=float))
        w = np.asarray(self.weights, dtype=float)
        if mu.size == 0 or sd.size == 0:
            raise EmptyGrid("hyper-prior grid has no points")
        if np.any(np.diff(mu) <= 0) or np.any(np.diff(sd) <= 0):
            raise ValidationError("grid values must be strictly ascending")
        if sd[0] < 0:
            raise ValidationError("sigma grid must be nonnegative")
        if w.shape != (mu.size, sd.size):
            raise ValidationError(f"weights have shape {w.shape}, expected {(mu.size, sd.size)}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be nonnegative and sum to one")
        object.__setattr__(self, "mu_grid", mu)
        object.__setattr__(self, "sigma_grid", sd)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, mu_grid, sigma_grid) -> "HyperPriorGrid":
        n_mu, n_sd = np.size(mu_grid), np.size(sigma_grid)
        if n_mu == 0 or n_sd == 0:
            raise EmptyGrid("hyper-prior grid has no points")
        return cls(mu_grid, sigma_grid, np.full((n_mu, n_sd), 1.0 / (n_mu * n_sd)))

    @classmethod
    def from_config(cls, cfg: dict) -> "HyperPriorGrid":
        """``{"mu": {"min", "max", "n"}, "sigma": {...}, "weights": "uniform"}``."""
        axes = []
        for name in ("mu", "sigma"):
            sub = cfg.get(name)
            if not isinstance(sub, dict):
                raise SchemaError(f"hyper.{name}: expected an object with min, max, n")
            try:
                lo, hi, n = float(sub["min"]), float(sub["max"]), int(sub["n"])
            except KeyError as exc:
                raise SchemaError(f"hyper.{name}.{exc.args[0]}: required field missing") from None
            except (TypeError, ValueError):
                raise SchemaError(f"hyper.{name}: min/max must be numbers and n an integer") from None
            if n < 1 or (n > 1 and hi <= lo):
                raise SchemaError(f"hyper.{name}: need n >= 1 and max > min")
            axes.append(np.linspace(lo, hi, n) if n > 1 else np.array([lo]))
        if cfg.get("weights", "uniform") != "uniform":
            raise SchemaError(f"hyper.weights: only 'uniform' is supported, got {cfg.get('weights')!r}")
        return cls.uniform(*axes)


def default_hyper_grid(es: EventStudy, n: int = 41) -> HyperPriorGrid:
    """Uniform grid: ``mu`` within 5 s.d. of the mean increment and ``sigma``
    on ``[0, 5 s.d.]``, where s.d. is the sample s.d. of ``w_hat``."""
    w_hat, sigma_w = increments(es)
    sd = float(np.std(w_hat, ddof=1)) if w_hat.size > 1 else 0.0
    if sd <= 0.0:
        sd = math.sqrt(float(np.mean(np.diag(sigma_w))))
    center = float(np.mean(w_hat))
    return HyperPriorGrid.uniform(
        np.linspace(center - 5 * sd, center + 5 * sd, n), np.linspace(0.0, 5 * sd, n)
    )


@dataclass(frozen=True, eq=False)
class HyperPosterior:
    mu_grid: np.ndarray
    sigma_grid: np.ndarray
    prior_weights: np.ndarray
    weights: np.ndarray  # posterior masses, shape (n_mu, n_sigma)
    component_means: np.ndarray  # (n_mu, n_sigma, n_post)
    component_covs: np.ndarray  # (n_sigma, n_post, n_post); independent of mu
    mixture_mean: np.ndarray
    mixture_cov: np.ndarray

    def marginal_mu(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def marginal_sigma(self) -> np.ndarray:
        return self.weights.sum(axis=0)

    def to_dict(self) -> dict:
        return {
            "mu_grid": self.mu_grid.tolist(),
            "sigma_grid": self.sigma_grid.tolist(),
            "posterior_mu": self.marginal_mu().tolist(),
            "posterior_sigma": self.marginal_sigma().tolist(),
            "posterior_mean_mu": float(self.marginal_mu() @ self.mu_grid),
            "posterior_mean_sigma": float(self.marginal_sigma() @ self.sigma_grid),
            "mixture_mean": self.mixture_mean.tolist(),
            "mixture_cov": self.mixture_cov.tolist(),
        }


def _component(es, sigma):
    # Posterior means are affine in the drift; covariances do not depend on it.
    p0 = posterior_closed_form(es, random_walk_prior(0.0, sigma**2, es.n_pre, es.n_post), allow_singular=True)
    p1 = posterior_closed_form(es, random_walk_prior(1.0, sigma**2, es.n_pre, es.n_post), allow_singular=True)
    return p0, p1


def _affine_mix(post, mus, comps, field):
    base = np.stack([getattr(p0, field) for p0, _ in comps])
    slope = np.stack([getattr(p1, field) - getattr(p0, field) for p0, p1 in comps])
    return post.sum(axis=0) @ base + (mus @ post) @ slope


def _log_evidence(w_hat, sigma_w, mus, sigma):
    chol = try_cholesky(sigma_w + sigma**2 * np.eye(w_hat.size))
    if chol is None:
        raise SingularOmega(f"Sigma_w + sigma^2 I is not positive definite at sigma={sigma}")
    r = w_hat[:, None] - mus[None, :]
    with np.errstate(over="ignore", invalid="ignore"):
        quad = np.sum(r * chol_solve(chol, r), axis=0)
    quad = np.where(np.isnan(quad), np.inf, quad)
    return -0.5 * (w_hat.size * LOG_2PI + chol_logdet(chol) + quad)


def mixture_cdf(x, weights, means, sds):
    return float(np.sum(weights * special.ndtr((x - means) / sds)))


def mixture_quantile(p, weights, means, sds, tol=1e-10, max_iter=400):
    """Bisection for ``F(x) = p`` where ``F`` is a normal-mixture CDF."""
    keep = weights > 0
    w, m, s = weights[keep], means[keep], sds[keep]
    lo = float(np.min(m - 40 * s))
    hi = float(np.max(m + 40 * s))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f = mixture_cdf(mid, w, m, s)
        if abs(f - p) < tol or hi - lo <= 4 * np.spacing(max(abs(lo), abs(hi))):
            return mid
        if f < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def mixture_intervals(hp: HyperPosterior, level: float) -> Intervals:
    if not 0.0 < level < 1.0:
        raise BadLevel(f"level must lie in (0, 1), got {level!r}")
    w = hp.weights.ravel()
    n_post = hp.mixture_mean.size
    lower, upper = np.empty(n_post), np.empty(n_post)
    n_mu = hp.mu_grid.size
    for t in range(n_post):
        means = hp.component_means[:, :, t].ravel()
        sds = np.tile(np.sqrt(hp.component_covs[:, t, t]), n_mu)
        lower[t] = mixture_quantile((1.0 - level) / 2.0, w, means, sds)
        upper[t] = mixture_quantile((1.0 + level) / 2.0, w, means, sds)
    return Intervals(float(level), lower, upper)


def hierarchical_posterior(es: EventStudy, grid: HyperPriorGrid | None = None, level: float = 0.95):
    """Average the random-walk posterior over a grid hyper-prior on ``(mu, sigma)``.

    Returns ``(HyperPosterior, PosteriorSummary)``; intervals come from the
    normal-mixture marginal CDF.
    """
    if grid is None:
        grid = default_hyper_grid(es)
    w_hat, sigma_w = increments(es)
    mus, sds = grid.mu_grid, grid.sigma_grid

    with np.errstate(divide="ignore"):
        log_prior = np.log(grid.weights)
    log_ev = np.column_stack(ordered_map(lambda s: _log_evidence(w_hat, sigma_w, mus, s), sds))
    log_w = log_prior + log_ev
    top = np.max(log_w)
    if not np.isfinite(top):
        raise AllWeightsUnderflow("every grid point has zero posterior density")
    post = np.exp(log_w - top)
    post /= post.sum()

    comps = ordered_map(lambda s: _component(es, s), sds)
    base = np.stack([p0.tau_mean for p0, _ in comps])  # (n_sigma, n_post)
    slope = np.stack([p1.tau_mean - p0.tau_mean for p0, p1 in comps])
    covs = np.stack([p0.tau_cov for p0, _ in comps])
    means = base[None, :, :] + mus[:, None, None] * slope[None, :, :]

    mix_mean = np.einsum("ij,ijt->t", post, means)
    second = np.einsum("ij,jst->st", post, covs) + np.einsum("ij,ijs,ijt->st", post, means, means)
    mix_cov = symmetrize(second - np.outer(mix_mean, mix_mean))

    hp = HyperPosterior(mus, sds, grid.weights, post, means, covs, mix_mean, mix_cov)
    support = np.argwhere(post > 0)
    if len(support) == 1:
        # A point-mass hyper-posterior is just the fixed-prior posterior; solve it
        # directly so results match that path exactly.
        i, j = support[0]
        prior = random_walk_prior(float(mus[i]), float(sds[j]) ** 2, es.n_pre, es.n_post)
        return hp, posterior(es, prior, level)
    summary = PosteriorSummary(
        tau_mean=mix_mean,
        tau_cov=mix_cov,
        delta_post_mean=_affine_mix(post, mus, comps, "delta_post_mean"),
        beta_pre_star=_affine_mix(post, mus, comps, "beta_pre_star"),
        intervals=mixture_intervals(hp, level),
    )
    return hp, summary
