"""Small dense symmetric-positive-definite matrix kernel.

Matrices are plain float64 ``numpy`` arrays. Every routine factors through
Cholesky; nothing here regularizes silently, a non-positive pivot raises
:class:`~tcplda.errors.NotPositiveDefinite` and the caller decides whether to
add jitter.
"""
import numpy as np

from tcplda import _backend
from tcplda.errors import DimensionMismatch, NotPositiveDefinite


def as_square(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def symmetrize(a):
    """Return ``(a + a.T) / 2``, exactly symmetric in storage."""
    a = as_square(a)
    lower = np.tril(0.5 * (a + a.T))
    return lower + np.tril(lower, -1).T


def cholesky(a):
    """Lower-triangular ``L`` with ``a = L @ L.T``.

    Only the lower triangle of ``a`` is read.
    """
    a = as_square(a)
    return _backend.kernels(a.shape[0]).cholesky(a)


def inverse_spd(a):
    """Inverse of an SPD matrix via its Cholesky factor; result is exactly symmetric."""
    a = as_square(a)
    return _backend.kernels(a.shape[0]).inverse_spd(a)


def logdet_spd(a):
    """``log|a|`` computed as ``2 * sum(log(diag(L)))``."""
    a = as_square(a)
    return float(_backend.kernels(a.shape[0]).logdet_spd(a))


def pivots_squared(a):
    """Squared Cholesky pivots, a cheap stand-in for the eigenvalue range."""
    return np.diag(cholesky(a)) ** 2


def is_positive_definite(a):
    try:
        cholesky(a)
    except NotPositiveDefinite:
        return False
    return True
