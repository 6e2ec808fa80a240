import numpy as np
import pytest
from hypothesis import settings

from bayestrends import GaussianPrior, make_event_study

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

ACCEPTANCE_LINES = []


def random_pd(rng, n, lo=0.3, hi=2.0):
    q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    return (q * rng.uniform(lo, hi, n)) @ q.T


def random_instance(rng, n_pre, n_post, lo=0.3, hi=2.0):
    """Event study and Gaussian prior with moderately conditioned covariances."""
    n = n_pre + n_post
    es = make_event_study(rng.normal(size=n_pre), rng.normal(size=n_post), random_pd(rng, n, lo, hi))
    prior = GaussianPrior(rng.normal(scale=0.5, size=n), random_pd(rng, n, lo, hi))
    return es, prior


@pytest.fixture
def scalar_case():
    es = make_event_study([1.0], [2.0], np.eye(2))
    prior = GaussianPrior([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]])
    return es, prior


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
