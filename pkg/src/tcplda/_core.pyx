# cython: language_level=3
"""Compiled kernels for small dense SPD algebra and the per-class EM sweep.

Every function here has a twin in ``tcplda._fallback`` with the same
signature and contract. Inputs are float64 C-contiguous arrays; callers in
``tcplda.spd`` and ``tcplda.em`` take care of conversion.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log

from tcplda.errors import NotPositiveDefinite

cnp.import_array()

NAME = "cython"


cdef int _chol_inplace(double[:, ::1] a, Py_ssize_t d) noexcept nogil:
    """Overwrite the lower triangle of ``a`` with its Cholesky factor.

    Returns -1 on success, otherwise the index of the failing pivot.
    The strict upper triangle is zeroed.
    """
    cdef Py_ssize_t i, j, k
    cdef double s
    for j in range(d):
        s = a[j, j]
        for k in range(j):
            s -= a[j, k] * a[j, k]
        # also rejects NaN
        if not (s > 0.0):
            a[j, j] = s
            return <int>j
        s = sqrt(s)
        a[j, j] = s
        for i in range(j + 1, d):
            a[j, i] = 0.0
            for k in range(j):
                a[i, j] -= a[i, k] * a[j, k]
            a[i, j] /= s
    return -1


cdef void _lower_inverse(double[:, ::1] L, double[:, ::1] out, Py_ssize_t d) noexcept nogil:
    """``out`` (lower) = L^{-1} by forward substitution."""
    cdef Py_ssize_t i, j, k
    cdef double s
    for j in range(d):
        for i in range(j):
            out[i, j] = 0.0
        out[j, j] = 1.0 / L[j, j]
        for i in range(j + 1, d):
            s = 0.0
            for k in range(j, i):
                s -= L[i, k] * out[k, j]
            out[i, j] = s / L[i, i]


cdef void _spd_inverse_from_factor(double[:, ::1] L, double[:, ::1] work,
                                   double[:, ::1] out, Py_ssize_t d) noexcept nogil:
    """``out`` = (L L^T)^{-1} = L^{-T} L^{-1}, exactly symmetric."""
    cdef Py_ssize_t i, j, k, start
    cdef double s
    _lower_inverse(L, work, d)
    for i in range(d):
        for j in range(i + 1):
            s = 0.0
            start = i if i > j else j
            for k in range(start, d):
                s += work[k, i] * work[k, j]
            out[i, j] = s
            out[j, i] = s


def _raise_pd(int idx, double pivot):
    raise NotPositiveDefinite(
        f"matrix is not positive definite (pivot {idx} = {pivot!r})",
        pivot_index=idx,
        pivot=pivot,
    )


def cholesky(a):
    cdef double[:, ::1] L = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t d = L.shape[0]
    cdef int bad
    with nogil:
        bad = _chol_inplace(L, d)
    if bad >= 0:
        _raise_pd(bad, L[bad, bad])
    return np.asarray(L)


def inverse_spd(a):
    cdef double[:, ::1] L = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t d = L.shape[0]
    cdef double[:, ::1] work = np.zeros((d, d))
    cdef double[:, ::1] out = np.empty((d, d))
    cdef int bad
    with nogil:
        bad = _chol_inplace(L, d)
        if bad < 0:
            _spd_inverse_from_factor(L, work, out, d)
    if bad >= 0:
        _raise_pd(bad, L[bad, bad])
    return np.asarray(out)


def logdet_spd(a):
    cdef double[:, ::1] L = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t d = L.shape[0], i
    cdef double s = 0.0
    cdef int bad
    with nogil:
        bad = _chol_inplace(L, d)
        if bad < 0:
            for i in range(d):
                s += log(L[i, i])
    if bad >= 0:
        _raise_pd(bad, L[bad, bad])
    return 2.0 * s


def accumulate(const double[:, ::1] X, const cnp.intp_t[::1] labels, Py_ssize_t num_classes):
    """Class counts, class means, global mean and within-class scatter.

    Two sequential passes over the rows; the scatter is summed in row order.
    """
    cdef Py_ssize_t N = X.shape[0], d = X.shape[1]
    cdef Py_ssize_t r, i, j, k
    cdef cnp.int64_t[::1] counts = np.zeros(num_classes, dtype=np.int64)
    cdef double[:, ::1] means = np.zeros((num_classes, d))
    cdef double[::1] mu = np.zeros(d)
    cdef double[:, ::1] S = np.zeros((d, d))
    cdef double[::1] diff = np.empty(d)
    with nogil:
        for r in range(N):
            k = labels[r]
            counts[k] += 1
            for i in range(d):
                means[k, i] += X[r, i]
                mu[i] += X[r, i]
        for i in range(d):
            mu[i] /= N
        for k in range(num_classes):
            for i in range(d):
                means[k, i] /= counts[k]
        for r in range(N):
            k = labels[r]
            for i in range(d):
                diff[i] = X[r, i] - means[k, i]
            for i in range(d):
                for j in range(i + 1):
                    S[i, j] += diff[i] * diff[j]
        for i in range(d):
            for j in range(i):
                S[j, i] = S[i, j]
    return np.asarray(counts), np.asarray(means), np.asarray(mu), np.asarray(S)


def em_sweep(const double[:, ::1] prec_b, const double[:, ::1] prec_w,
             const cnp.int64_t[::1] counts, const double[:, ::1] centered):
    """E-step over every class, reduced to the two M-step sums.

    Returns ``(sum_b, sum_w)`` with
    ``sum_b = sum_k phi_hat_k + w_k w_k^T`` and
    ``sum_w = sum_k n_k (phi_hat_k + (w_k - m_k)(w_k - m_k)^T)``.
    The posterior covariance depends only on n: classes are visited in stable
    order of count so it is factored once per distinct n.
    """
    cdef Py_ssize_t K = centered.shape[0], d = centered.shape[1]
    cdef Py_ssize_t k, kk, i, j, l
    cdef cnp.intp_t[::1] order = np.argsort(counts, kind="stable")
    cdef cnp.int64_t n, last_n = -1
    cdef double s, nn
    cdef int bad = -1
    cdef double[:, ::1] P = np.empty((d, d))
    cdef double[:, ::1] work = np.zeros((d, d))
    cdef double[:, ::1] phi_hat = np.empty((d, d))
    cdef double[:, ::1] gain = np.empty((d, d))
    cdef double[::1] w = np.empty(d)
    cdef double[::1] r = np.empty(d)
    cdef double[:, ::1] sum_b = np.zeros((d, d))
    cdef double[:, ::1] sum_w = np.zeros((d, d))
    with nogil:
        for kk in range(K):
            k = order[kk]
            n = counts[k]
            nn = <double>n
            if n != last_n:
                for i in range(d):
                    for j in range(d):
                        P[i, j] = prec_b[i, j] + nn * prec_w[i, j]
                bad = _chol_inplace(P, d)
                if bad >= 0:
                    break
                _spd_inverse_from_factor(P, work, phi_hat, d)
                # gain = phi_hat * n * prec_w, so that w = gain * m
                for i in range(d):
                    for j in range(d):
                        s = 0.0
                        for l in range(d):
                            s += phi_hat[i, l] * prec_w[l, j]
                        gain[i, j] = nn * s
                last_n = n
            for i in range(d):
                s = 0.0
                for j in range(d):
                    s += gain[i, j] * centered[k, j]
                w[i] = s
                r[i] = s - centered[k, i]
            for i in range(d):
                for j in range(i + 1):
                    sum_b[i, j] += phi_hat[i, j] + w[i] * w[j]
                    sum_w[i, j] += nn * (phi_hat[i, j] + r[i] * r[j])
        if bad < 0:
            for i in range(d):
                for j in range(i):
                    sum_b[j, i] = sum_b[i, j]
                    sum_w[j, i] = sum_w[i, j]
    if bad >= 0:
        _raise_pd(bad, P[bad, bad])
    return np.asarray(sum_b), np.asarray(sum_w)


def marginal_terms(const double[:, ::1] phi_b, const double[:, ::1] phi_w,
                   const cnp.int64_t[::1] counts, const double[:, ::1] centered):
    """Sum over classes of log|phi_b + phi_w/n_k| and m_k^T (phi_b + phi_w/n_k)^{-1} m_k."""
    cdef Py_ssize_t K = centered.shape[0], d = centered.shape[1]
    cdef Py_ssize_t k, kk, i, j
    cdef cnp.intp_t[::1] order = np.argsort(counts, kind="stable")
    cdef cnp.int64_t n, last_n = -1
    cdef double s, nn, ld = 0.0, sum_ld = 0.0, sum_q = 0.0
    cdef int bad = -1
    cdef double[:, ::1] C = np.empty((d, d))
    cdef double[::1] y = np.empty(d)
    with nogil:
        for kk in range(K):
            k = order[kk]
            n = counts[k]
            if n != last_n:
                nn = <double>n
                for i in range(d):
                    for j in range(d):
                        C[i, j] = phi_b[i, j] + phi_w[i, j] / nn
                bad = _chol_inplace(C, d)
                if bad >= 0:
                    break
                ld = 0.0
                for i in range(d):
                    ld += log(C[i, i])
                ld *= 2.0
                last_n = n
            sum_ld += ld
            # quadratic form via L y = m
            for i in range(d):
                s = centered[k, i]
                for j in range(i):
                    s -= C[i, j] * y[j]
                y[i] = s / C[i, i]
                sum_q += y[i] * y[i]
    if bad >= 0:
        _raise_pd(bad, C[bad, bad])
    return sum_ld, sum_q
