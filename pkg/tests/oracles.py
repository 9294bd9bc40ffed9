"""Reference computations that share no code path with tcplda."""
import math

import numpy as np
from scipy.stats import multivariate_normal


def posterior_by_quadrature(phi_b, phi_w, n, m, lo=-10.0, hi=10.0, step=1e-4):
    """Mean and variance of N(x|0,phi_b) * N(x|m,phi_w/n) on a uniform grid."""
    x = np.arange(lo, hi + step / 2, step)
    log_f = -0.5 * x**2 / phi_b - 0.5 * n * (x - m) ** 2 / phi_w
    f = np.exp(log_f - log_f.max())
    z = f.sum()
    mean = float((x * f).sum() / z)
    var = float(((x - mean) ** 2 * f).sum() / z)
    return mean, var


def joint_log_density(labels, X, mu, phi_b, phi_w):
    """Log-density of the stacked samples under the block covariance
    ``phi_b * [same class] + phi_w * [same sample]``."""
    N, d = X.shape
    cov = np.zeros((N * d, N * d))
    for i in range(N):
        for j in range(N):
            block = np.zeros((d, d))
            if labels[i] == labels[j]:
                block = block + phi_b
            if i == j:
                block = block + phi_w
            cov[i * d:(i + 1) * d, j * d:(j + 1) * d] = block
    return float(multivariate_normal(np.tile(mu, N), cov).logpdf(X.ravel()))


def brute_force_stats(labels, X):
    """Global mean, per-label (count, mean) in first-appearance order, and scatter by loops."""
    N, d = X.shape
    mu = [sum(X[r, i] for r in range(N)) / N for i in range(d)]
    order = []
    for lab in labels:
        if lab not in order:
            order.append(lab)
    per_class = {}
    for lab in order:
        rows = [X[r] for r in range(N) if labels[r] == lab]
        per_class[lab] = (len(rows), [sum(v[i] for v in rows) / len(rows) for i in range(d)])
    S = [[0.0] * d for _ in range(d)]
    for r in range(N):
        c = per_class[labels[r]][1]
        for i in range(d):
            for j in range(d):
                S[i][j] += (X[r, i] - c[i]) * (X[r, j] - c[j])
    return np.array(mu), order, per_class, np.array(S)


def scalar_normal_logpdf(x, mean, var):
    return -0.5 * math.log(2 * math.pi * var) - 0.5 * (x - mean) ** 2 / var
