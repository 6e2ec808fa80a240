"""Synthetic event studies from known data-generating processes, and Monte
Carlo experiments on interval coverage and hyperparameter consistency."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ._linalg import psd_factor, symmetrize, try_cholesky
from .empirical_bayes import eb_posterior, fit_random_walk_mle, hierarchical_posterior
from .errors import BayesTrendsError, ConfigError, DimensionMismatch, NotPositiveDefinite, ReplicationFailed, ValidationError
from .gaussian import normal_quantile, posterior
from .model import EventStudy, GaussianPrior, PriorSpec, RandomWalk, validate_event_study
from .parallel import ordered_map
from .priors import build_prior

METHODS = ("bayes_known_prior", "eb", "hierarchical", "ols")


@dataclass(frozen=True, eq=False)
class DgpSpec:
    prior_spec: PriorSpec
    tau_post_true: np.ndarray
    sigma: np.ndarray
    n_pre: int
    n_post: int
    seed: int = 0

    def __post_init__(self):
        tau = np.atleast_1d(np.asarray(self.tau_post_true, dtype=float))
        sigma = symmetrize(np.atleast_2d(np.asarray(self.sigma, dtype=float)))
        n = self.n_pre + self.n_post
        if self.n_pre < 1 or self.n_post < 1:
            raise DimensionMismatch("need n_pre >= 1 and n_post >= 1")
        if tau.shape != (self.n_post,):
            raise DimensionMismatch(f"tau_post_true has shape {tau.shape}, expected ({self.n_post},)")
        if sigma.shape != (n, n):
            raise DimensionMismatch(f"sigma has shape {sigma.shape}, expected ({n}, {n})")
        if try_cholesky(sigma) is None:
            raise NotPositiveDefinite("DGP sampling covariance is not positive definite")
        object.__setattr__(self, "tau_post_true", tau)
        object.__setattr__(self, "sigma", sigma)

    @property
    def prior(self) -> GaussianPrior:
        return build_prior(self.prior_spec, self.n_pre, self.n_post)


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream keyed by ``(seed, index)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(index)])))


class Sampler:
    """Reusable draw function for one DGP; ``sampler(i)`` is replication ``i``."""

    def __init__(self, dgp: DgpSpec):
        self.dgp = dgp
        prior = dgp.prior
        self.prior = prior
        self.delta_factor = psd_factor(prior.cov)
        self.noise_factor = np.linalg.cholesky(dgp.sigma)
        self.pre = tuple(range(-dgp.n_pre, 0))
        self.post = tuple(range(1, dgp.n_post + 1))

    def __call__(self, index: int) -> EventStudy:
        d = self.dgp
        n = d.n_pre + d.n_post
        rng = replication_rng(d.seed, index)
        z = rng.standard_normal(2 * n)
        delta = self.prior.mean + self.delta_factor @ z[:n]
        beta = delta.copy()
        beta[d.n_pre :] += d.tau_post_true
        beta_hat = beta + self.noise_factor @ z[n:]
        return validate_event_study(
            EventStudy(self.pre, self.post, beta_hat[: d.n_pre], beta_hat[d.n_pre :], d.sigma)
        )


def simulate_event_study(dgp: DgpSpec, replication_index: int) -> EventStudy:
    """Draw violations from the DGP prior, add the true effects, then add
    ``N(0, sigma)`` sampling noise."""
    return Sampler(dgp)(replication_index)


@dataclass(frozen=True, eq=False)
class CoverageReport:
    method: str
    level: float
    periods: tuple
    coverage: np.ndarray
    mean_length: np.ndarray
    bias: np.ndarray
    se: np.ndarray
    n_reps: int
    bias_se: np.ndarray = field(default=None)

    def rows(self):
        for t, p in enumerate(self.periods):
            yield {
                "period": p,
                "method": self.method,
                "level": self.level,
                "coverage": float(self.coverage[t]),
                "mean_length": float(self.mean_length[t]),
                "bias": float(self.bias[t]),
                "se": float(self.se[t]),
            }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()


CSV_COLUMNS = ["period", "method", "level", "coverage", "mean_length", "bias", "se"]


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _interval(method, es, level, known_prior, grid):
    if method == "ols":
        k = es.n_pre
        sd = np.sqrt(np.diag(es.sigma)[k:])
        z = normal_quantile((1.0 + level) / 2.0)
        return es.beta_post, es.beta_post - z * sd, es.beta_post + z * sd
    if method == "bayes_known_prior":
        ps = posterior(es, known_prior, level)
    elif method == "eb":
        ps = eb_posterior(es, level)[1]
    elif method == "hierarchical":
        ps = hierarchical_posterior(es, grid, level)[1]
    else:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
    return ps.tau_mean, ps.intervals.lower, ps.intervals.upper


def coverage_experiment(
    dgp: DgpSpec,
    method: str,
    n_reps: int,
    level: float = 0.95,
    analysis_prior: GaussianPrior | None = None,
    grid=None,
) -> CoverageReport:
    """Per-period coverage of ``method``'s intervals for the true effects.

    ``bayes_known_prior`` analyses with the DGP's own violation prior unless
    ``analysis_prior`` is given.  A failing replication aborts the run.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
    if n_reps < 100:
        raise ValidationError(f"need at least 100 replications, got {n_reps}")
    sampler = Sampler(dgp)
    known = analysis_prior if analysis_prior is not None else sampler.prior
    truth = dgp.tau_post_true

    def one(i):
        try:
            es = sampler(i)
            est, lo, hi = _interval(method, es, level, known, grid)
        except BayesTrendsError as exc:
            raise ReplicationFailed(i, exc) from exc
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            raise ReplicationFailed(i, exc) from exc
        return (lo <= truth) & (truth <= hi), hi - lo, est - truth

    results = ordered_map(one, range(n_reps))
    covered = np.array([r[0] for r in results], dtype=float)
    length = np.array([r[1] for r in results])
    err = np.array([r[2] for r in results])
    cov = covered.mean(axis=0)
    return CoverageReport(
        method=method,
        level=float(level),
        periods=tuple(range(1, dgp.n_post + 1)),
        coverage=cov,
        mean_length=length.mean(axis=0),
        bias=err.mean(axis=0),
        se=np.sqrt(cov * (1.0 - cov) / n_reps),
        n_reps=n_reps,
        bias_se=err.std(axis=0, ddof=1) / np.sqrt(n_reps),
    )


def mle_consistency_experiment(
    true_mu: float,
    true_sigma2: float,
    sigma_scale: float,
    n_pre_list,
    n_reps: int,
    seed: int = 0,
):
    """Median absolute hyperparameter errors of the random-walk MLE.

    Sampling noise is ``sigma_scale**2 * I`` (``sigma_scale`` is a standard
    deviation).  Returns one dict per entry of ``n_pre_list``.
    """
    n_pre_list = list(n_pre_list)
    if n_pre_list != sorted(n_pre_list):
        raise ValidationError("n_pre_list must be ascending")
    table = []
    for n_pre in n_pre_list:
        dgp = DgpSpec(
            RandomWalk(true_mu, true_sigma2),
            np.zeros(1),
            sigma_scale**2 * np.eye(n_pre + 1),
            n_pre,
            1,
            seed,
        )
        sampler = Sampler(dgp)

        def one(i):
            try:
                fit = fit_random_walk_mle(sampler(i))
            except BayesTrendsError as exc:
                raise ReplicationFailed(i, exc) from exc
            return abs(fit.mu_hat - true_mu), abs(fit.sigma2_hat - true_sigma2), fit.boundary

        res = np.array(ordered_map(one, range(n_reps)), dtype=float)
        table.append(
            {
                "n_pre": n_pre,
                "median_abs_err_mu": float(np.median(res[:, 0])),
                "median_abs_err_sigma2": float(np.median(res[:, 1])),
                "boundary_rate": float(res[:, 2].mean()),
                "n_reps": n_reps,
            }
        )
    return table
