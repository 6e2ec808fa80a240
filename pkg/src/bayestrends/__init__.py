"""Bayesian and empirical-Bayes inference for event studies when parallel
trends may fail."""

__version__ = "0.1.0"

from .errors import BayesTrendsError, ConfigError, ValidationError
from .model import (
    AR1,
    EventStudy,
    Explicit,
    GaussianPrior,
    Intervals,
    PosteriorSummary,
    RandomWalk,
    make_event_study,
    split_covariance,
    validate_event_study,
)
from .priors import ar1_prior, build_prior, differencing_matrix, random_walk_prior
from .gaussian import (
    FlatTau,
    GaussianTau,
    JointPosterior,
    credible_set,
    posterior,
    posterior_closed_form,
    posterior_information_form,
)
from .empirical_bayes import (
    EbFit,
    HyperPosterior,
    HyperPriorGrid,
    eb_posterior,
    fit_random_walk_mle,
    hierarchical_posterior,
)
from .simulator import CoverageReport, DgpSpec, coverage_experiment, mle_consistency_experiment, simulate_event_study
