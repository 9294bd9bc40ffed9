"""Verification scoring with a trained model.

A trial compares the predictive density of a test vector under the
enrolled class, ``N(t; w_e, phi_hat_e + phi_w)``, with its density under a
fresh class drawn from the prior, ``N(t; 0, phi_b + phi_w)`` (``t`` is
the test vector minus ``mu``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from tcplda.em import LOG_2PI, ClassPosterior, PldaModel, e_step_class
from tcplda.errors import DimensionMismatch, EmptyEnrollment
from tcplda.spd import cholesky


@dataclass(frozen=True)
class Enrollment:
    posterior: ClassPosterior

    @property
    def model_dim(self):
        return self.posterior.w.shape[0]


def enroll(model: PldaModel, vectors) -> Enrollment:
    """Posterior over the class center given one or more enrollment vectors."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim == 1:
        vectors = vectors[None, :]
    if vectors.size == 0 or vectors.shape[0] == 0:
        raise EmptyEnrollment("enrollment needs at least one vector")
    if vectors.ndim != 2 or vectors.shape[1] != model.dim:
        raise DimensionMismatch(f"enrollment vectors have shape {vectors.shape}, model dim is {model.dim}")
    m = vectors.mean(axis=0) - model.mu
    return Enrollment(e_step_class(model, m, vectors.shape[0]))


def gaussian_logpdf(x, mean, cov):
    """Multivariate normal log-density through a Cholesky factor of ``cov``."""
    L = cholesky(cov)
    diff = np.asarray(x, dtype=np.float64) - mean
    y = solve_triangular(L, diff, lower=True)
    d = L.shape[0]
    return -0.5 * (d * LOG_2PI + 2.0 * np.sum(np.log(np.diag(L))) + float(y @ y))


def score_llr(model: PldaModel, enrollment: Enrollment, test) -> float:
    """Log-likelihood ratio of same-class against different-class for one test vector."""
    t = np.asarray(test, dtype=np.float64).ravel()
    if t.shape != (model.dim,) or enrollment.model_dim != model.dim:
        raise DimensionMismatch(f"test vector has shape {t.shape}, model dim is {model.dim}")
    t = t - model.mu
    post = enrollment.posterior
    same = gaussian_logpdf(t, post.w, post.phi_hat + model.phi_w)
    diff = gaussian_logpdf(t, np.zeros_like(t), model.phi_b + model.phi_w)
    return float(same - diff)
