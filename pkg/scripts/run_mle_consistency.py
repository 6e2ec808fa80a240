#!/usr/bin/env python3
"""Median hyperparameter error of the random-walk MLE as the pre-period grows."""

import argparse

from bayestrends import mle_consistency_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mu", type=float, default=-0.24)
    ap.add_argument("--sigma2", type=float, default=0.3721)
    ap.add_argument("--noise-sd", type=float, default=0.01)
    ap.add_argument("--n-pre", type=int, nargs="+", default=[10, 40, 160])
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    table = mle_consistency_experiment(args.mu, args.sigma2, args.noise_sd, args.n_pre, args.reps, args.seed)
    print(f"{'n_pre':>6} {'med|mu err|':>12} {'med|s2 err|':>12} {'boundary':>9}")
    for row in table:
        print(
            f"{row['n_pre']:>6d} {row['median_abs_err_mu']:12.4f} "
            f"{row['median_abs_err_sigma2']:12.4f} {row['boundary_rate']:9.3f}"
        )


if __name__ == "__main__":
    main()
