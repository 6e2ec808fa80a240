"""Structured Gaussian priors over the violation vector.

Both families are anchored at the reference period: the violation at period 0
is zero, either by construction (random walk) or by conditioning (AR(1)).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DimensionMismatch, SchemaError
from .model import AR1, Explicit, GaussianPrior, PriorSpec, RandomWalk


def _periods(n_pre, n_post):
    if n_pre < 1 or n_post < 1:
        raise DimensionMismatch(f"need n_pre >= 1 and n_post >= 1, got {n_pre}, {n_post}")
    return np.concatenate([np.arange(-n_pre, 0), np.arange(1, n_post + 1)])


def differencing_matrix(n_pre: int) -> np.ndarray:
    """Matrix ``M`` mapping pre-period coefficients to increments.

    Row ``i`` gives ``w_t = delta_t - delta_{t-1}`` for ``t = -n_pre+1, ..., 0``;
    the last row uses ``delta_0 = 0`` and so is ``-delta_{-1}``.
    """
    if n_pre < 1:
        raise DimensionMismatch(f"n_pre must be >= 1, got {n_pre}")
    m = -np.eye(n_pre)
    m[np.arange(n_pre - 1), np.arange(1, n_pre)] = 1.0
    return m


def random_walk_prior(mu: float, sigma2: float, n_pre: int, n_post: int) -> GaussianPrior:
    """Prior implied by iid ``N(mu, sigma2)`` increments with ``delta_0 = 0``.

    Covariance between periods ``s`` and ``t`` is ``sigma2 * min(|s|, |t|)`` on
    the same side of the reference period and zero across it.
    """
    spec = RandomWalk(float(mu), float(sigma2))
    t = _periods(n_pre, n_post)
    same_side = np.sign(t)[:, None] == np.sign(t)[None, :]
    cov = spec.sigma2 * np.where(same_side, np.minimum(np.abs(t)[:, None], np.abs(t)[None, :]), 0.0)
    return GaussianPrior(spec.mu * t.astype(float), cov)


def ar1_prior(rho: float, sigma_eps2: float, n_pre: int, n_post: int) -> GaussianPrior:
    """Stationary mean-zero AR(1) conditioned on ``delta_0 = 0``."""
    spec = AR1(float(rho), float(sigma_eps2))
    t = _periods(n_pre, n_post)
    v = spec.sigma_eps2 / (1.0 - spec.rho**2)
    a = np.abs(t)
    lag = np.abs(t[:, None] - t[None, :])
    cov = v * (spec.rho**lag - spec.rho ** (a[:, None] + a[None, :]))
    return GaussianPrior(np.zeros(t.size), cov)


def build_prior(spec: PriorSpec, n_pre: int, n_post: int) -> GaussianPrior:
    if isinstance(spec, RandomWalk):
        return random_walk_prior(spec.mu, spec.sigma2, n_pre, n_post)
    if isinstance(spec, AR1):
        return ar1_prior(spec.rho, spec.sigma_eps2, n_pre, n_post)
    if isinstance(spec, Explicit):
        if spec.prior.dim != n_pre + n_post:
            raise DimensionMismatch(
                f"explicit prior has dimension {spec.prior.dim}, event study has {n_pre + n_post}"
            )
        return spec.prior
    raise TypeError(f"not a prior spec: {spec!r}")


def _number(d, key, where):
    if key not in d:
        raise SchemaError(f"{where}.{key}: required field missing")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{where}.{key}: expected a number, got {v!r}")
    return float(v)


def prior_spec_from_dict(d, where="prior") -> PriorSpec:
    """Parse ``{"type": "random_walk" | "ar1" | "explicit", ...}``."""
    if not isinstance(d, dict):
        raise SchemaError(f"{where}: expected an object")
    kind = d.get("type")
    if kind == "random_walk":
        return RandomWalk(_number(d, "mu", where), _number(d, "sigma2", where))
    if kind == "ar1":
        return AR1(_number(d, "rho", where), _number(d, "sigma_eps2", where))
    if kind == "explicit":
        for key in ("mean", "cov"):
            if key not in d:
                raise SchemaError(f"{where}.{key}: required field missing")
        try:
            mean = np.asarray(d["mean"], dtype=float)
            cov = np.asarray(d["cov"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{where}: mean/cov must be numeric arrays ({exc})") from None
        return Explicit(GaussianPrior(mean, cov))
    raise ConfigError(f"{where}.type: unknown prior type {kind!r}")


def prior_spec_to_dict(spec: PriorSpec) -> dict:
    if isinstance(spec, RandomWalk):
        return {"type": "random_walk", "mu": spec.mu, "sigma2": spec.sigma2}
    if isinstance(spec, AR1):
        return {"type": "ar1", "rho": spec.rho, "sigma_eps2": spec.sigma_eps2}
    if isinstance(spec, Explicit):
        return {
            "type": "explicit",
            "mean": spec.prior.mean.tolist(),
            "cov": spec.prior.cov.tolist(),
        }
    raise TypeError(f"not a prior spec: {spec!r}")
