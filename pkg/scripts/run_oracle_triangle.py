#!/usr/bin/env python3
"""Compare the closed-form posterior against both brute-force oracles.

For small random instances, reports the largest absolute gap in the effect
means and variances between the solver, tensor-grid quadrature and the
proper-prior limit (high-precision arithmetic).
"""

import argparse
import time

import numpy as np

from bayestrends import GaussianPrior, make_event_study, posterior_closed_form
from bayestrends.oracle import grid_posterior_oracle, proper_prior_limit_oracle


def random_pd(rng, n, lo=0.5, hi=1.5):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.T


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=20)
    ap.add_argument("--kappa", type=float, default=1e8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'#':>3} {'T_pre':>5} {'quad-solver':>12} {'limit-solver':>13} {'secs':>6}")
    for i in range(args.instances):
        n_pre = 1 + i % 2
        n = n_pre + 1
        es = make_event_study(rng.normal(size=n_pre), rng.normal(size=1), random_pd(rng, n))
        prior = GaussianPrior(rng.normal(scale=0.5, size=n), random_pd(rng, n))
        start = time.perf_counter()
        exact = posterior_closed_form(es, prior)
        gaps = []
        for mean, cov in (grid_posterior_oracle(es, prior), proper_prior_limit_oracle(es, prior, args.kappa)):
            gaps.append(max(np.max(np.abs(mean - exact.tau_mean)), np.max(np.abs(np.diag(cov) - np.diag(exact.tau_cov)))))
        print(f"{i:>3d} {n_pre:>5d} {gaps[0]:12.2e} {gaps[1]:13.2e} {time.perf_counter() - start:6.2f}")


if __name__ == "__main__":
    main()
