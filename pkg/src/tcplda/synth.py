"""Sampling datasets from the two-covariance generative model.

Random numbers come from ``numpy.random.Generator(PCG64(seed))`` and its
``standard_normal`` method (ziggurat). Draw order is fixed: for each class,
``d`` normals for the center, then ``n_k * d`` normals for its samples, row
by row. Datasets are therefore bitwise reproducible for a given seed and
numpy version.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tcplda.errors import DimensionMismatch, TooFewClasses
from tcplda.spd import as_square, cholesky
from tcplda.stats import LabeledDataset


@dataclass
class SynthSpec:
    mu: np.ndarray
    phi_b: np.ndarray
    phi_w: np.ndarray
    num_classes: int
    samples_per_class: int | list[int]
    seed: int = 0

    @property
    def dim(self):
        return np.asarray(self.mu).shape[0]

    def counts(self):
        if np.isscalar(self.samples_per_class):
            counts = [int(self.samples_per_class)] * self.num_classes
        else:
            counts = [int(n) for n in self.samples_per_class]
            if len(counts) != self.num_classes:
                raise DimensionMismatch(f"{len(counts)} class sizes for {self.num_classes} classes")
        if min(counts) < 1:
            raise ValueError("every class needs at least one sample")
        return counts


def _factor(a, d):
    a = as_square(a)
    if a.shape != (d, d):
        raise DimensionMismatch(f"covariance has shape {a.shape}, expected {(d, d)}")
    if not a.any():
        return np.zeros((d, d))
    return cholesky(a)


def random_spd(d, rng, ridge=1.0, scale=1.0):
    """``scale * (M^T M / d + ridge * I)`` with standard normal ``M``."""
    rng = np.random.default_rng(rng)
    M = rng.standard_normal((d, d))
    return scale * (M.T @ M / d + ridge * np.eye(d))


def generate(spec: SynthSpec) -> LabeledDataset:
    """Draw ``y_k ~ N(mu, phi_b)`` per class and ``z ~ N(y_k, phi_w)`` per sample.

    Labels are ``"c0"``, ``"c1"``, ... Exactly-zero covariance matrices are
    allowed and contribute nothing; any other non-PD matrix raises.
    """
    if spec.num_classes < 2:
        raise TooFewClasses(f"need at least 2 classes, got {spec.num_classes}")
    mu = np.asarray(spec.mu, dtype=np.float64).ravel()
    d = mu.shape[0]
    Lb = _factor(spec.phi_b, d)
    Lw = _factor(spec.phi_w, d)
    counts = spec.counts()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    out = np.empty((sum(counts), d))
    labels = []
    row = 0
    for k, n in enumerate(counts):
        center = mu + Lb @ rng.standard_normal(d)
        noise = rng.standard_normal((n, d))
        out[row:row + n] = center + noise @ Lw.T
        labels.extend([f"c{k}"] * n)
        row += n
    return LabeledDataset(tuple(labels), out)
