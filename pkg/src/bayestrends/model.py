"""Observable data model: event-study estimates, Gaussian priors over the
trend-violation vector and posterior summaries.

Conventions: pre-treatment periods are labelled ``-T_pre, ..., -1``, the
omitted reference period is ``0`` (so the violation at 0 is normalized to
zero) and post-treatment periods are ``1, ..., T_post``.  Every stacked vector
or matrix is ordered pre-then-post.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._linalg import is_psd, symmetrize, try_cholesky
from .errors import BadPeriods, DimensionMismatch, NegativeVariance, BadRho, NotPositiveDefinite


def _frozen(a, ndim):
    a = np.array(a, dtype=float, ndmin=ndim)
    if a.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {a.shape}")
    a.flags.writeable = False
    return a


def _labels(x):
    a = np.asarray(x)
    if a.ndim != 1:
        raise BadPeriods(f"period labels must be a flat list, got shape {a.shape}")
    if a.size and not np.all(np.equal(np.mod(a, 1), 0)):
        raise BadPeriods(f"period labels must be integers: {a.tolist()}")
    return tuple(int(v) for v in a)


@dataclass(frozen=True, eq=False)
class EventStudy:
    pre_periods: tuple
    post_periods: tuple
    beta_pre: np.ndarray
    beta_post: np.ndarray
    sigma: np.ndarray

    @property
    def n_pre(self) -> int:
        return len(self.pre_periods)

    @property
    def n_post(self) -> int:
        return len(self.post_periods)

    @property
    def beta(self) -> np.ndarray:
        return np.concatenate([self.beta_pre, self.beta_post])

    @property
    def periods(self) -> tuple:
        return tuple(self.pre_periods) + tuple(self.post_periods)

    def __eq__(self, other):
        if not isinstance(other, EventStudy):
            return NotImplemented
        return (
            tuple(self.pre_periods) == tuple(other.pre_periods)
            and tuple(self.post_periods) == tuple(other.post_periods)
            and np.array_equal(self.beta_pre, other.beta_pre)
            and np.array_equal(self.beta_post, other.beta_post)
            and np.array_equal(self.sigma, other.sigma)
        )

    def to_dict(self) -> dict:
        return {
            "pre_periods": list(self.pre_periods),
            "post_periods": list(self.post_periods),
            "beta_pre": [float(v) for v in self.beta_pre],
            "beta_post": [float(v) for v in self.beta_post],
            "sigma": [[float(v) for v in row] for row in self.sigma],
        }

    @classmethod
    def from_dict(cls, d) -> "EventStudy":
        missing = [k for k in ("beta_pre", "beta_post", "sigma") if k not in d]
        if missing:
            raise DimensionMismatch(f"event study is missing fields {missing}")
        try:
            beta_pre = np.asarray(d["beta_pre"], dtype=float)
            beta_post = np.asarray(d["beta_post"], dtype=float)
            sigma = np.asarray(d["sigma"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise DimensionMismatch(f"event study arrays are malformed: {exc}") from None
        pre = d.get("pre_periods", list(range(-beta_pre.size, 0)))
        post = d.get("post_periods", list(range(1, beta_post.size + 1)))
        return validate_event_study(EventStudy(_labels(pre), _labels(post), beta_pre, beta_post, sigma))


def make_event_study(beta_pre, beta_post, sigma) -> EventStudy:
    """Validated event study with the default period labels."""
    beta_pre = np.atleast_1d(np.asarray(beta_pre, dtype=float))
    beta_post = np.atleast_1d(np.asarray(beta_post, dtype=float))
    return validate_event_study(
        EventStudy(
            tuple(range(-beta_pre.size, 0)),
            tuple(range(1, beta_post.size + 1)),
            beta_pre,
            beta_post,
            np.atleast_2d(np.asarray(sigma, dtype=float)),
        )
    )


def validate_event_study(raw: EventStudy) -> EventStudy:
    """Check shapes, period labels and positive definiteness.

    ``sigma`` is replaced by its symmetric part before the Cholesky check; no
    other repair is attempted.
    """
    pre = _labels(raw.pre_periods)
    post = _labels(raw.post_periods)
    n_pre, n_post = len(pre), len(post)
    if n_pre < 1 or n_post < 1:
        raise BadPeriods(f"need at least one pre and one post period, got {n_pre} and {n_post}")
    if pre != tuple(range(-n_pre, 0)):
        raise BadPeriods(f"pre periods must be {-n_pre}..-1, got {list(pre)}")
    if post != tuple(range(1, n_post + 1)):
        raise BadPeriods(f"post periods must be 1..{n_post}, got {list(post)}")

    beta_pre = np.asarray(raw.beta_pre, dtype=float)
    beta_post = np.asarray(raw.beta_post, dtype=float)
    sigma = np.asarray(raw.sigma, dtype=float)
    n = n_pre + n_post
    if beta_pre.shape != (n_pre,):
        raise DimensionMismatch(f"beta_pre has shape {beta_pre.shape}, expected ({n_pre},)")
    if beta_post.shape != (n_post,):
        raise DimensionMismatch(f"beta_post has shape {beta_post.shape}, expected ({n_post},)")
    if sigma.shape != (n, n):
        raise DimensionMismatch(f"sigma has shape {sigma.shape}, expected ({n}, {n})")
    if not (np.all(np.isfinite(beta_pre)) and np.all(np.isfinite(beta_post)) and np.all(np.isfinite(sigma))):
        raise DimensionMismatch("event study contains non-finite values")

    sigma = symmetrize(sigma)
    if try_cholesky(sigma) is None:
        raise NotPositiveDefinite("sampling covariance sigma is not positive definite")
    return EventStudy(pre, post, _frozen(beta_pre, 1), _frozen(beta_post, 1), _frozen(sigma, 2))


def split_covariance(es: EventStudy):
    """Return ``(sigma_pre, sigma_post, sigma_pre_post)``."""
    k = es.n_pre
    s = es.sigma
    return s[:k, :k], s[k:, k:], s[:k, k:]


@dataclass(frozen=True, eq=False)
class GaussianPrior:
    """Normal prior over the stacked violations ``(delta_pre, delta_post)``."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen(self.mean, 1)
        cov = symmetrize(np.atleast_2d(np.asarray(self.cov, dtype=float)))
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(f"prior cov has shape {cov.shape}, mean has length {mean.size}")
        if not np.all(np.isfinite(cov)):
            raise DimensionMismatch("prior covariance contains non-finite values")
        if not is_psd(cov):
            raise NotPositiveDefinite("prior covariance is not positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _frozen(cov, 2))

    @property
    def dim(self) -> int:
        return self.mean.size

    def blocks(self, n_pre):
        """``(mu_pre, mu_post, V_pre, V_post, V_pre_post)``."""
        if not 0 < n_pre < self.dim:
            raise DimensionMismatch(f"cannot split a {self.dim}-d prior at {n_pre}")
        m, v = self.mean, self.cov
        return m[:n_pre], m[n_pre:], v[:n_pre, :n_pre], v[n_pre:, n_pre:], v[:n_pre, n_pre:]


# Prior specifications.  Concrete priors are built by ``priors.build_prior``.


@dataclass(frozen=True)
class RandomWalk:
    mu: float
    sigma2: float

    def __post_init__(self):
        if not np.isfinite(self.mu) or not np.isfinite(self.sigma2):
            raise NegativeVariance("random-walk parameters must be finite")
        if self.sigma2 < 0:
            raise NegativeVariance(f"sigma2 must be >= 0, got {self.sigma2}")


@dataclass(frozen=True)
class AR1:
    rho: float
    sigma_eps2: float

    def __post_init__(self):
        if not np.isfinite(self.rho) or abs(self.rho) >= 1:
            raise BadRho(f"AR(1) requires |rho| < 1, got {self.rho}")
        if not np.isfinite(self.sigma_eps2) or self.sigma_eps2 <= 0:
            raise NegativeVariance(f"sigma_eps2 must be > 0, got {self.sigma_eps2}")


@dataclass(frozen=True)
class Explicit:
    prior: GaussianPrior


PriorSpec = Union[RandomWalk, AR1, Explicit]


@dataclass(frozen=True, eq=False)
class Intervals:
    level: float
    lower: np.ndarray
    upper: np.ndarray


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    tau_mean: np.ndarray
    tau_cov: np.ndarray
    delta_post_mean: np.ndarray
    beta_pre_star: np.ndarray
    intervals: Intervals | None = field(default=None)

    @property
    def tau_sd(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.tau_cov), 0.0, None))

    def to_dict(self) -> dict:
        d = {
            "tau_mean": self.tau_mean.tolist(),
            "tau_cov": np.asarray(self.tau_cov).tolist(),
            "delta_post_mean": self.delta_post_mean.tolist(),
            "beta_pre_star": self.beta_pre_star.tolist(),
        }
        if self.intervals is not None:
            d["intervals"] = {
                "level": self.intervals.level,
                "lower": self.intervals.lower.tolist(),
                "upper": self.intervals.upper.tolist(),
            }
        return d
