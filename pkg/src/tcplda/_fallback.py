"""Pure-Python kernels (numpy + LAPACK), used when ``tcplda._core`` is absent.

Signatures and contracts mirror the compiled module one for one.
"""
import numpy as np
from scipy.linalg import lapack

from tcplda.errors import NotPositiveDefinite

NAME = "python"


def _potrf(a):
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    c, info = lapack.dpotrf(a, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (pivot {info - 1})", pivot_index=info - 1
        )
    if info < 0:
        raise ValueError(f"dpotrf: illegal argument {-info}")
    return c


def cholesky(a):
    return np.ascontiguousarray(_potrf(a))


def inverse_spd(a):
    c = _potrf(a)
    inv, info = lapack.dpotri(c, lower=1)
    if info != 0:
        raise NotPositiveDefinite(f"dpotri failed (info={info})")
    lower = np.tril(inv)
    return lower + np.tril(lower, -1).T


def logdet_spd(a):
    return 2.0 * float(np.sum(np.log(np.diag(_potrf(a)))))


def accumulate(X, labels, num_classes):
    X = np.asarray(X, dtype=np.float64)
    counts = np.bincount(labels, minlength=num_classes).astype(np.int64)
    sums = np.zeros((num_classes, X.shape[1]))
    np.add.at(sums, labels, X)
    means = sums / counts[:, None]
    mu = X.sum(axis=0) / X.shape[0]
    D = X - means[labels]
    S = D.T @ D
    return counts, means, mu, _mirror_lower(S)


def _mirror_lower(a):
    lower = np.tril(a)
    return lower + np.tril(lower, -1).T


def em_sweep(prec_b, prec_w, counts, centered):
    d = centered.shape[1]
    sum_b = np.zeros((d, d))
    sum_w = np.zeros((d, d))
    for n in np.unique(counts):
        sel = counts == n
        M = centered[sel]
        phi_hat = inverse_spd(prec_b + n * prec_w)
        gain = n * (phi_hat @ prec_w)
        W = M @ gain.T
        R = W - M
        k = M.shape[0]
        sum_b += k * phi_hat + W.T @ W
        sum_w += n * (k * phi_hat + R.T @ R)
    return _mirror_lower(sum_b), _mirror_lower(sum_w)


def marginal_terms(phi_b, phi_w, counts, centered):
    sum_ld = 0.0
    sum_q = 0.0
    for n in np.unique(counts):
        sel = counts == n
        L = _potrf(phi_b + phi_w / n)
        sum_ld += 2.0 * float(np.sum(np.log(np.diag(L)))) * int(sel.sum())
        Y = lapack.dtrtrs(L, centered[sel].T, lower=1)[0]
        sum_q += float(np.sum(Y * Y))
    return sum_ld, sum_q
