"""Labeled vectors and the sufficient statistics EM training consumes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tcplda import _backend
from tcplda.errors import DimensionMismatch, TooFewClasses


@dataclass(frozen=True)
class LabeledDataset:
    """Rows of ``vectors`` paired with opaque string class labels."""

    labels: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[1] < 1:
            raise DimensionMismatch(f"vectors must be a 2-D (N, d) array, got shape {vectors.shape}")
        labels = tuple(str(lab) for lab in self.labels)
        if len(labels) != vectors.shape[0]:
            raise DimensionMismatch(f"{len(labels)} labels for {vectors.shape[0]} vectors")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vectors", vectors)

    @classmethod
    def from_records(cls, records, dim=None):
        """Build from an iterable of ``(label, vector)`` pairs; ragged input raises."""
        labels, rows = [], []
        for i, (label, vec) in enumerate(records):
            vec = np.asarray(vec, dtype=np.float64).ravel()
            if dim is None:
                dim = vec.shape[0]
            if vec.shape[0] != dim:
                raise DimensionMismatch(f"record {i} has length {vec.shape[0]}, expected {dim}")
            labels.append(label)
            rows.append(vec)
        if not rows:
            raise DimensionMismatch("dataset has no records")
        return cls(tuple(labels), np.vstack(rows))

    @property
    def dim(self):
        return self.vectors.shape[1]

    def __len__(self):
        return self.vectors.shape[0]

    def class_index(self):
        """Dense class indices in first-appearance order, and the ordered label list."""
        order = {}
        idx = np.empty(len(self.labels), dtype=np.intp)
        for i, lab in enumerate(self.labels):
            idx[i] = order.setdefault(lab, len(order))
        return idx, list(order)

    def select(self, label):
        """Vectors whose label equals ``label``."""
        mask = np.fromiter((lab == label for lab in self.labels), dtype=bool, count=len(self.labels))
        return self.vectors[mask]


@dataclass(frozen=True)
class ClassStats:
    label: str
    n: int
    mean: np.ndarray
    centered_mean: np.ndarray


@dataclass(frozen=True)
class DatasetStats:
    """One pass over a dataset: counts, means, global mean and scatter.

    ``centered`` holds the class means minus ``mu`` row by row, and
    ``scatter`` is ``sum_k sum_i (z_ki - c_k)(z_ki - c_k)^T``.
    """

    mu: np.ndarray
    labels: list[str]
    counts: np.ndarray
    means: np.ndarray
    centered: np.ndarray
    scatter: np.ndarray
    _classes: list = field(default=None, repr=False, compare=False)

    @property
    def dim(self):
        return self.mu.shape[0]

    @property
    def N(self):
        return int(self.counts.sum())

    @property
    def K(self):
        return len(self.counts)

    @property
    def classes(self):
        if self._classes is None:
            object.__setattr__(self, "_classes", [
                ClassStats(lab, int(n), self.means[k], self.centered[k])
                for k, (lab, n) in enumerate(zip(self.labels, self.counts))
            ])
        return self._classes

    def total_covariance(self):
        """``(1/N) sum (z - mu)(z - mu)^T`` recovered from the stored statistics."""
        M = self.centered * np.sqrt(self.counts)[:, None]
        return (self.scatter + M.T @ M) / self.N


def accumulate_stats(data: LabeledDataset, min_classes=2) -> DatasetStats:
    """Single deterministic pass producing :class:`DatasetStats`.

    Raises
    ------
    TooFewClasses
        If the data holds fewer than ``min_classes`` distinct labels.
    """
    idx, labels = data.class_index()
    if len(labels) < min_classes:
        raise TooFewClasses(f"need at least {min_classes} classes, found {len(labels)}")
    counts, means, mu, scatter = _backend.kernels(data.dim).accumulate(data.vectors, idx, len(labels))
    counts = np.asarray(counts, dtype=np.int64)
    return DatasetStats(
        mu=np.asarray(mu),
        labels=labels,
        counts=counts,
        means=np.asarray(means),
        centered=np.asarray(means) - np.asarray(mu),
        scatter=np.asarray(scatter),
    )


def center_dataset(data: LabeledDataset, mu) -> LabeledDataset:
    """Subtract ``mu`` from every vector."""
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (data.dim,):
        raise DimensionMismatch(f"mean has shape {mu.shape}, data dim is {data.dim}")
    return LabeledDataset(data.labels, data.vectors - mu)
