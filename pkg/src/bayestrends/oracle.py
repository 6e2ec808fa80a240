"""Brute-force reference computations used to check the analytic paths.

Nothing here shares code with the production posterior or MLE routines
beyond the data model: quadrature evaluates the unnormalized posterior
density directly, the proper-prior limit conditions in covariance form at
extended precision, the MLE oracle scans a grid and the prior-moment oracle
simulates increment paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from ._linalg import psd_factor, symmetrize, try_cholesky
from .errors import (
    DimensionMismatch,
    DimensionTooLarge,
    GridTooCoarse,
    SingularCovariance,
    SingularPrior,
    ValidationError,
)
from .model import AR1, EventStudy, Explicit, GaussianPrior, PriorSpec, RandomWalk
from .priors import differencing_matrix

MAX_QUADRATURE_DIM = 4
DEFAULT_POINTS = {3: 200, 4: 80}


def _default_points(dim):
    return DEFAULT_POINTS.get(dim, 40)


def grid_posterior_oracle(
    es: EventStudy,
    prior: GaussianPrior,
    grid_half_width: float = 8.0,
    points_per_dim: int | None = None,
    target: float = 1e-3,
):
    """Tensor-grid Riemann quadrature of the posterior of ``tau_post``.

    The flat prior on ``tau_post`` is represented as a uniform window of
    ``grid_half_width`` prior-predictive standard deviations around
    ``beta_post - mu_post``.  Each violation coordinate is gridded over
    ``grid_half_width`` prior standard deviations around its prior mean.

    Returns ``(tau_mean, tau_cov)``.  Raises :class:`GridTooCoarse` when the
    same sum on every other grid point moves the moments by more than
    ``target``, or when the window edge carries non-negligible density.
    """
    n_pre, n_post = es.n_pre, es.n_post
    n = n_pre + n_post
    dim = n + n_post
    if dim > MAX_QUADRATURE_DIM:
        raise DimensionTooLarge(f"quadrature supports at most {MAX_QUADRATURE_DIM} dimensions, got {dim}")
    if prior.dim != n:
        raise DimensionMismatch(f"prior has dimension {prior.dim}, expected {n}")
    if try_cholesky(prior.cov) is None:
        raise SingularPrior("quadrature needs a positive definite prior covariance")
    npts = points_per_dim or _default_points(dim)
    if npts < 8:
        raise GridTooCoarse(f"need at least 8 points per dimension, got {npts}")

    v = prior.cov
    s = es.sigma
    centers = np.concatenate([prior.mean, es.beta_post - prior.mean[n_pre:]])
    scales = np.concatenate([np.sqrt(np.diag(v)), np.sqrt(np.diag(s)[n_pre:] + np.diag(v)[n_pre:])])
    axes = [c + grid_half_width * sc * np.linspace(-1.0, 1.0, npts) for c, sc in zip(centers, scales)]

    s_inv = np.linalg.inv(s)
    v_inv = np.linalg.inv(v)
    # beta = obs @ x with x = (delta_pre, delta_post, tau_post)
    obs = np.zeros((n, dim))
    obs[:, :n] = np.eye(n)
    obs[n_pre:, n:] = np.eye(n_post)

    mesh = np.stack(np.meshgrid(*axes[1:], indexing="ij"), axis=-1).reshape(-1, dim - 1)
    rest_shape = (npts,) * (dim - 1)
    coarse = np.zeros(rest_shape, dtype=bool)
    coarse[tuple(slice(None, None, 2) for _ in range(dim - 1))] = True
    coarse = coarse.ravel()
    on_face = np.zeros(rest_shape, dtype=bool)
    for ax in range(dim - 1):
        idx = [slice(None)] * (dim - 1)
        idx[ax] = [0, -1]
        on_face[tuple(idx)] = True
    on_face = on_face.ravel()

    # Split each residual into a part driven by the first coordinate and a
    # part driven by the remaining ones; the latter is shared by every slice.
    obs_rest = mesh @ obs[:, 1:].T
    obs_rest_s = obs_rest @ s_inv
    quad_rest = np.einsum("ij,ij->i", obs_rest_s, obs_rest)
    pri = np.zeros((n, dim))
    pri[:, :n] = np.eye(n)
    dev_rest = mesh @ pri[:, 1:].T
    dev_rest_v = dev_rest @ v_inv
    quad_dev_rest = np.einsum("ij,ij->i", dev_rest_v, dev_rest)
    tau = mesh[:, n - 1 :]
    tau_coarse = tau[coarse]

    acc = {"fine": _Moments(n_post), "coarse": _Moments(n_post)}
    edge = -np.inf
    peak = -np.inf
    for i0, x0 in enumerate(axes[0]):
        r0 = es.beta - obs[:, 0] * x0
        d0 = pri[:, 0] * x0 - prior.mean
        logp = -0.5 * (
            r0 @ s_inv @ r0 - 2.0 * obs_rest_s @ r0 + quad_rest
            + d0 @ v_inv @ d0 + 2.0 * dev_rest_v @ d0 + quad_dev_rest
        )

        peak = max(peak, float(logp.max()))
        face = logp if i0 in (0, npts - 1) else logp[on_face]
        edge = max(edge, float(face.max()))

        acc["fine"].add(logp, tau)
        if i0 % 2 == 0:
            acc["coarse"].add(logp[coarse], tau_coarse)

    mean, cov = acc["fine"].result()
    mean_c, cov_c = acc["coarse"].result()
    err = max(np.max(np.abs(mean - mean_c)), np.max(np.abs(cov - cov_c)))
    if err > target:
        raise GridTooCoarse(f"estimated discretization error {err:.3g} exceeds target {target:.3g}")
    if edge - peak > -18.0:
        raise GridTooCoarse(
            f"posterior density at the grid edge is exp({edge - peak:.1f}) of its peak; widen the grid"
        )
    return mean, cov


class _Moments:
    """Running first/second moments with a log-scale shift."""

    def __init__(self, k):
        self.k = k
        self.shift = -np.inf
        self.z = 0.0
        self.s1 = np.zeros(k)
        self.s2 = np.zeros((k, k))

    def add(self, logp, tau):
        m = float(logp.max())
        if m > self.shift:
            scale = np.exp(self.shift - m) if np.isfinite(self.shift) else 0.0
            self.z *= scale
            self.s1 *= scale
            self.s2 *= scale
            self.shift = m
        p = np.exp(logp - self.shift)
        pt = tau * p[:, None]
        self.z += p.sum()
        self.s1 += pt.sum(axis=0)
        self.s2 += pt.T @ tau

    def result(self):
        mean = self.s1 / self.z
        cov = self.s2 / self.z - np.outer(mean, mean)
        return mean, cov


def proper_prior_limit_oracle(es: EventStudy, prior: GaussianPrior, kappa: float, dps: int = 60):
    """Condition ``(delta, tau_post) ~ N((mu, 0), blockdiag(V, kappa I))`` on
    the estimates, in covariance form at ``dps`` significant digits.

    Returns ``(tau_mean, tau_cov)`` as float arrays.
    """
    n_pre, n_post = es.n_pre, es.n_post
    n = n_pre + n_post
    if prior.dim != n:
        raise DimensionMismatch(f"prior has dimension {prior.dim}, expected {n}")
    if not np.isfinite(kappa) or kappa <= 0:
        raise SingularCovariance(f"kappa must be positive, got {kappa}")
    d = n + n_post
    c0 = np.zeros((d, d))
    c0[:n, :n] = prior.cov
    c0[n:, n:] = kappa * np.eye(n_post)
    w = np.linalg.eigvalsh(c0)
    if w[0] <= 1e-14 * w[-1]:
        raise SingularCovariance("joint prior covariance is numerically singular")

    with mpmath.workdps(dps):
        C0 = mpmath.matrix(c0.tolist())
        A = mpmath.matrix(d - n_post, d)
        for i in range(n):
            A[i, i] = 1
        for t in range(n_post):
            A[n_pre + t, n + t] = 1
        m0 = mpmath.matrix([float(x) for x in prior.mean] + [0.0] * n_post)
        S = A * C0 * A.T + mpmath.matrix(es.sigma.tolist())
        resid = mpmath.matrix(es.beta.tolist()) - A * m0
        CA = C0 * A.T
        gain = CA * mpmath.inverse(S)
        mean = m0 + gain * resid
        cov = C0 - gain * CA.T
        tau_mean = np.array([float(mean[n + t]) for t in range(n_post)])
        tau_cov = np.array([[float(cov[n + a, n + b]) for b in range(n_post)] for a in range(n_post)])
    return tau_mean, symmetrize(tau_cov)


def mle_grid_oracle(es: EventStudy, mu_range, sigma_range, n: int = 400):
    """Exhaustive maximizer of the increment log-likelihood over an ``n x n``
    grid of drift ``mu`` and innovation s.d. ``sigma``.

    Returns ``(mu_best, sigma2_best, loglik_best)``.
    """
    if n < 100:
        raise ValidationError(f"grid oracle needs n >= 100 points per dimension, got {n}")
    lo_s, hi_s = sigma_range
    if lo_s < 0 or hi_s <= lo_s or mu_range[1] <= mu_range[0]:
        raise ValidationError(f"bad grid ranges mu={mu_range}, sigma={sigma_range}")
    mus = np.linspace(mu_range[0], mu_range[1], n)
    sigmas = np.linspace(lo_s, hi_s, n)
    m = differencing_matrix(es.n_pre)
    k = es.n_pre
    w_hat = m @ es.beta_pre
    sigma_w = m @ es.sigma[:k, :k] @ m.T
    resid = w_hat[:, None] - mus[None, :]

    best = (-np.inf, None, None)
    for sd in sigmas:
        chol = np.linalg.cholesky(sigma_w + sd**2 * np.eye(k))
        z = np.linalg.solve(chol, resid)
        ll = -0.5 * (k * np.log(2 * np.pi) + 2 * np.sum(np.log(np.diag(chol))) + np.sum(z * z, axis=0))
        j = int(np.argmax(ll))
        if ll[j] > best[0]:
            best = (float(ll[j]), float(mus[j]), float(sd**2))
    return best[1], best[2], best[0]


@dataclass(frozen=True, eq=False)
class MomentEstimate:
    mean: np.ndarray
    cov: np.ndarray
    mean_se: np.ndarray
    cov_se: np.ndarray
    n: int


def _moments(x):
    n = x.shape[0]
    mean = x.mean(axis=0)
    c = x - mean
    prod = c[:, :, None] * c[:, None, :]
    cov = prod.mean(axis=0) * n / (n - 1)
    cov_se = prod.std(axis=0) / np.sqrt(n)
    mean_se = x.std(axis=0, ddof=1) / np.sqrt(n)
    return MomentEstimate(mean, cov, mean_se, cov_se, n)


def simulate_prior_paths(spec: PriorSpec, n_pre: int, n_post: int, n_draws: int, rng, method: str = "exact"):
    """Draw violation paths ``(delta_pre, delta_post)`` from their generative
    description, one path per row."""
    if isinstance(spec, RandomWalk):
        w = rng.normal(spec.mu, np.sqrt(spec.sigma2), size=(n_draws, n_pre + n_post))
        w_pre, w_post = w[:, :n_pre], w[:, n_pre:]
        delta_pre = -np.cumsum(w_pre[:, ::-1], axis=1)[:, ::-1]
        delta_post = np.cumsum(w_post, axis=1)
        return np.hstack([delta_pre, delta_post])
    if isinstance(spec, AR1):
        if method == "exact":
            return _ar1_anchored(spec, n_pre, n_post, n_draws, rng)
        if method == "rejection":
            return _ar1_rejection(spec, n_pre, n_post, n_draws, rng)
        raise ValueError(f"unknown AR(1) sampling method {method!r}")
    if isinstance(spec, Explicit):
        factor = psd_factor(spec.prior.cov)
        z = rng.standard_normal((n_draws, spec.prior.dim))
        return spec.prior.mean + z @ factor.T
    raise TypeError(f"not a prior spec: {spec!r}")


def _ar1_anchored(spec, n_pre, n_post, n_draws, rng):
    # Stationary Gaussian AR(1) is time-reversible and Markov, so given
    # delta_0 = 0 each side is an AR(1) started at zero, independently.
    eps = rng.normal(0.0, np.sqrt(spec.sigma_eps2), size=(n_draws, n_pre + n_post))
    out = np.empty_like(eps)
    prev = np.zeros(n_draws)
    for k in range(n_pre):
        prev = spec.rho * prev + eps[:, k]
        out[:, n_pre - 1 - k] = prev
    prev = np.zeros(n_draws)
    for t in range(n_post):
        prev = spec.rho * prev + eps[:, n_pre + t]
        out[:, n_pre + t] = prev
    return out


def _ar1_rejection(spec, n_pre, n_post, n_draws, rng, tol=1e-2):
    # n_draws full stationary paths; only those with |delta_0| < tol are kept.
    v = spec.sigma_eps2 / (1.0 - spec.rho**2)
    length = n_pre + 1 + n_post
    path = np.empty((n_draws, length))
    path[:, 0] = rng.normal(0.0, np.sqrt(v), size=n_draws)
    eps = rng.normal(0.0, np.sqrt(spec.sigma_eps2), size=(n_draws, length - 1))
    for k in range(1, length):
        path[:, k] = spec.rho * path[:, k - 1] + eps[:, k - 1]
    keep = np.abs(path[:, n_pre]) < tol
    return np.delete(path[keep], n_pre, axis=1)


def mc_prior_moments(
    spec: PriorSpec, n_pre: int, n_post: int, n_draws: int, seed: int, method: str = "exact"
) -> MomentEstimate:
    """Sample mean and covariance (with standard errors) of simulated paths.

    For ``method="rejection"`` (AR(1) only) ``n_draws`` is the number of
    stationary paths simulated; the estimate uses the retained ones.
    """
    if n_draws < 10_000:
        raise ValidationError(f"need at least 1e4 draws, got {n_draws}")
    rng = np.random.default_rng(seed)
    x = simulate_prior_paths(spec, n_pre, n_post, n_draws, rng, method=method)
    if x.shape[0] < 2:
        raise ValidationError("too few retained draws to estimate moments")
    return _moments(x)
