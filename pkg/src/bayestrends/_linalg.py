"""Small dense linear-algebra helpers built on Cholesky factorizations."""

import numpy as np
from scipy import linalg


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return (a + a.T) / 2.0


def try_cholesky(a):
    """Lower Cholesky factor of ``a`` or ``None`` when ``a`` is not PD."""
    try:
        c = linalg.cholesky(a, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        return None
    if not np.all(np.isfinite(c)) or np.any(np.diag(c) <= 0.0):
        return None
    return c


def is_pd(a):
    return try_cholesky(symmetrize(a)) is not None


def chol_solve(factor, b):
    """Solve ``A x = b`` given the lower Cholesky factor of ``A``."""
    return linalg.cho_solve((factor, True), b, check_finite=False)


def chol_logdet(factor):
    return 2.0 * float(np.sum(np.log(np.diag(factor))))


def is_psd(a, rtol=1e-10):
    a = symmetrize(a)
    if a.size == 0:
        return True
    w = np.linalg.eigvalsh(a)
    scale = max(np.max(np.abs(w)), 0.0)
    return bool(w[0] >= -rtol * scale)


def psd_factor(a):
    """A matrix ``L`` with ``L @ L.T == a`` for symmetric PSD ``a``.

    Cholesky when it succeeds, otherwise a clipped eigendecomposition so that
    degenerate (e.g. all-zero) covariances can still be sampled from.
    """
    a = symmetrize(a)
    c = try_cholesky(a)
    if c is not None:
        return c
    w, q = np.linalg.eigh(a)
    return q * np.sqrt(np.clip(w, 0.0, None))
