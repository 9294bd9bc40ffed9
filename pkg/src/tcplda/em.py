"""Two-covariance PLDA: posterior inference, M-step updates and the EM loop.

The model draws a class center ``y ~ N(mu, phi_b)`` and observations
``z ~ N(y, phi_w)``. With ``mu`` removed, the mean ``m`` of a class with
``n`` members splits as ``m = x_between + y_within`` where
``x_between ~ N(0, phi_b)`` and ``y_within ~ N(0, phi_w / n)``. The E-step
is the Gaussian posterior of ``x_between`` given ``m``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from tcplda import _backend
from tcplda.errors import AlignmentError, DimensionMismatch, NonFiniteLikelihood, NotPositiveDefinite
from tcplda.spd import as_square, cholesky, inverse_spd, logdet_spd, pivots_squared, symmetrize
from tcplda.stats import DatasetStats, LabeledDataset, accumulate_stats

log = logging.getLogger(__name__)

VARIANTS = ("paper", "kaldi")
INITS = ("identity", "data-split")
LOG_2PI = math.log(2.0 * math.pi)

# escalation schedule for jitter: eps, 10 eps, 100 eps, ...
_JITTER_TRIES = 40
# eigenvalue floor for the moment initialization, relative to trace(total)/d
_INIT_FLOOR = 1e-3


@dataclass(frozen=True)
class PldaModel:
    mu: np.ndarray
    phi_b: np.ndarray
    phi_w: np.ndarray

    def __post_init__(self):
        mu = np.ascontiguousarray(self.mu, dtype=np.float64).ravel()
        phi_b = as_square(self.phi_b)
        phi_w = as_square(self.phi_w)
        d = mu.shape[0]
        if phi_b.shape != (d, d) or phi_w.shape != (d, d):
            raise DimensionMismatch(
                f"mu has dim {d} but phi_b is {phi_b.shape} and phi_w is {phi_w.shape}"
            )
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "phi_b", phi_b)
        object.__setattr__(self, "phi_w", phi_w)

    @property
    def dim(self):
        return self.mu.shape[0]

    def validate(self):
        """Raise unless both covariances are symmetric and ``phi_w`` is PD."""
        for name in ("phi_b", "phi_w"):
            a = getattr(self, name)
            if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
                raise NotPositiveDefinite(f"{name} is not symmetric")
        cholesky(self.phi_w)
        return self


@dataclass(frozen=True)
class ClassPosterior:
    """Posterior ``N(w, phi_hat)`` of the between-class latent for one class."""

    phi_hat: np.ndarray
    w: np.ndarray
    n: int


@dataclass
class TrainConfig:
    iterations: int = 10
    variant: str = "kaldi"
    jitter: float | None = None  # None: 1e-8 * trace / d of the matrix being fixed
    tolerance: float = 0.0
    init: str = "data-split"

    def __post_init__(self):
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.init not in INITS:
            raise ValueError(f"init must be one of {INITS}, got {self.init!r}")
        if self.jitter is not None and not self.jitter >= 0:
            raise ValueError(f"jitter must be >= 0, got {self.jitter!r}")
        if not self.tolerance >= 0:
            raise ValueError(f"tolerance must be >= 0, got {self.tolerance!r}")


@dataclass(frozen=True)
class JitterEvent:
    iteration: int  # 0 = initialization
    matrix: str
    amount: float


@dataclass(frozen=True)
class IterationRecord:
    """Diagnostics after one EM update.

    ``log_likelihood`` is the objective the chosen variant ascends (see
    :func:`objective`); ``sample_log_likelihood`` is always the full
    per-sample marginal from :func:`log_likelihood`.
    """

    log_likelihood: float
    sample_log_likelihood: float
    phi_b_trace: float
    phi_w_trace: float
    phi_b_min_pivot2: float
    phi_w_min_pivot2: float

    @property
    def min_eigen_estimate(self):
        return min(self.phi_b_min_pivot2, self.phi_w_min_pivot2)


@dataclass
class TrainReport:
    variant: str
    initial_log_likelihood: float = float("nan")
    iterations: list[IterationRecord] = field(default_factory=list)
    jitter_events: list[JitterEvent] = field(default_factory=list)

    @property
    def log_likelihoods(self):
        return [rec.log_likelihood for rec in self.iterations]


def default_jitter(a):
    d = a.shape[0]
    scale = float(np.trace(a)) / d
    return 1e-8 * (scale if scale > 0 else 1.0)


def make_pd(a, name, jitter=None, events=None, iteration=0):
    """Return ``a`` unchanged if it factors, else ``a + eps*I`` for the first working eps.

    eps starts at ``jitter`` (or :func:`default_jitter`) and grows tenfold per
    retry. Each repair is logged and, if ``events`` is given, recorded there.
    """
    try:
        cholesky(a)
        return a
    except NotPositiveDefinite:
        pass
    eps = default_jitter(a) if not jitter else float(jitter)
    eye = np.eye(a.shape[0])
    for _ in range(_JITTER_TRIES):
        fixed = a + eps * eye
        try:
            cholesky(fixed)
        except NotPositiveDefinite:
            eps *= 10.0
            continue
        log.warning("%s lost positive definiteness; added %.3g * I", name, eps)
        if events is not None:
            events.append(JitterEvent(iteration, name, eps))
        return fixed
    raise NotPositiveDefinite(f"{name} could not be repaired by jitter")


def _precision_of_between(phi_b, jitter=None, events=None, iteration=0):
    """``phi_b^{-1}``, jittering a singular ``phi_b`` first."""
    try:
        return inverse_spd(phi_b)
    except NotPositiveDefinite:
        return inverse_spd(make_pd(phi_b, "phi_b", jitter, events, iteration))


def e_step_class(model: PldaModel, m, n, jitter=None) -> ClassPosterior:
    """Posterior of the between-class latent given a centered class mean.

    ``phi_hat = (phi_b^{-1} + n phi_w^{-1})^{-1}`` and
    ``w = phi_hat @ (n phi_w^{-1} m)``.
    """
    m = np.asarray(m, dtype=np.float64).ravel()
    if m.shape != (model.dim,):
        raise DimensionMismatch(f"class mean has shape {m.shape}, model dim is {model.dim}")
    if n < 1:
        raise ValueError(f"class count must be >= 1, got {n}")
    prec_w = inverse_spd(model.phi_w)
    prec_b = _precision_of_between(model.phi_b, jitter)
    phi_hat = inverse_spd(prec_b + n * prec_w)
    z = n * (prec_w @ m)
    w = phi_hat @ z
    return ClassPosterior(phi_hat=phi_hat, w=w, n=int(n))


def e_step(model: PldaModel, stats: DatasetStats, jitter=None):
    """:func:`e_step_class` for every class of ``stats``, in class order."""
    centered = stats.means - model.mu
    return [e_step_class(model, centered[k], int(n), jitter) for k, n in enumerate(stats.counts)]


def _finish_m_step(sum_b, sum_w, stats, variant, jitter=None, events=None, iteration=0):
    K, N = stats.K, stats.N
    phi_b = symmetrize(sum_b / K)
    if variant == "paper":
        phi_w = symmetrize(sum_w / K)
    elif variant == "kaldi":
        phi_w = symmetrize((stats.scatter + sum_w) / N)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    phi_b = make_pd(phi_b, "phi_b", jitter, events, iteration)
    phi_w = make_pd(phi_w, "phi_w", jitter, events, iteration)
    return phi_b, phi_w


def m_step(posteriors, class_means, stats: DatasetStats, variant="kaldi", jitter=None, events=None):
    """Re-estimate ``(phi_b, phi_w)`` from per-class posteriors.

    ``phi_b`` is the average of ``phi_hat_k + w_k w_k^T`` in both variants.
    ``paper`` averages ``n_k (phi_hat_k + (w_k - m_k)(w_k - m_k)^T)`` over
    the K classes; ``kaldi`` adds the scatter matrix to that sum and divides
    by N instead.
    """
    if len(posteriors) != stats.K or len(class_means) != stats.K:
        raise AlignmentError(
            f"{len(posteriors)} posteriors and {len(class_means)} means for {stats.K} classes"
        )
    d = stats.dim
    sum_b = np.zeros((d, d))
    sum_w = np.zeros((d, d))
    for post, m, n in zip(posteriors, class_means, stats.counts):
        if post.n != n:
            raise AlignmentError(f"posterior computed for n={post.n}, class has n={n}")
        r = post.w - np.asarray(m, dtype=np.float64)
        sum_b += post.phi_hat + np.outer(post.w, post.w)
        sum_w += n * (post.phi_hat + np.outer(r, r))
    return _finish_m_step(sum_b, sum_w, stats, variant, jitter, events)


def log_likelihood(model: PldaModel, stats: DatasetStats) -> float:
    """Log-density of every sample with the class centers integrated out.

    Only ``S``, the class counts and class means enter, so the within-class
    part collapses to ``-(N-K)/2 log|phi_w| - tr(phi_w^{-1} S)/2``.
    """
    d, N, K = stats.dim, stats.N, stats.K
    centered = np.ascontiguousarray(stats.means - model.mu)
    sum_ld, sum_q = _backend.kernels(stats.dim).marginal_terms(model.phi_b, model.phi_w, stats.counts, centered)
    within = 0.0
    if N > K:
        within = -0.5 * (N - K) * logdet_spd(model.phi_w)
    else:
        cholesky(model.phi_w)
    within -= 0.5 * float(np.sum(inverse_spd(model.phi_w) * stats.scatter))
    return (
        -0.5 * N * d * LOG_2PI
        + within
        - 0.5 * d * float(np.sum(np.log(stats.counts)))
        - 0.5 * sum_ld
        - 0.5 * sum_q
    )


def class_mean_log_likelihood(model: PldaModel, stats: DatasetStats) -> float:
    """``sum_k log N(m_k; 0, phi_b + phi_w / n_k)``; the objective the ``paper`` variant ascends."""
    centered = np.ascontiguousarray(stats.means - model.mu)
    sum_ld, sum_q = _backend.kernels(stats.dim).marginal_terms(model.phi_b, model.phi_w, stats.counts, centered)
    return -0.5 * stats.K * stats.dim * LOG_2PI - 0.5 * sum_ld - 0.5 * sum_q


def objective(model: PldaModel, stats: DatasetStats, variant: str) -> float:
    """Log-likelihood that an EM step of ``variant`` cannot decrease.

    ``kaldi`` is exact EM for the per-sample model, so it ascends
    :func:`log_likelihood`. ``paper`` only sees the pooled class means and
    ascends :func:`class_mean_log_likelihood`; its per-sample likelihood
    may dip.
    """
    if variant == "paper":
        return class_mean_log_likelihood(model, stats)
    return log_likelihood(model, stats)


def _floor_eigenvalues(a, floor):
    vals, vecs = np.linalg.eigh(a)
    return symmetrize((vecs * np.maximum(vals, floor)) @ vecs.T)


def initial_model(stats: DatasetStats, init="data-split", jitter=None, events=None) -> PldaModel:
    """Starting point for EM.

    ``identity`` uses ``I`` for both covariances. ``data-split`` takes
    ``S / (N - K)`` as the within-class guess and the remainder of the total
    covariance as the between-class guess, with eigenvalues floored at
    ``1e-3 * trace(total) / d`` so that both start positive definite.
    """
    d = stats.dim
    if init == "identity":
        return PldaModel(stats.mu, np.eye(d), np.eye(d))
    if init != "data-split":
        raise ValueError(f"unknown init {init!r}")
    total = symmetrize(stats.total_covariance())
    scale = float(np.trace(total)) / d
    floor = _INIT_FLOOR * scale if scale > 0 else 1.0
    if stats.N > stats.K:
        phi_w = symmetrize(stats.scatter / (stats.N - stats.K))
    else:
        phi_w = np.zeros((d, d))
    phi_b = _floor_eigenvalues(total - phi_w, floor)
    phi_w = _floor_eigenvalues(phi_w, floor)
    return PldaModel(stats.mu, phi_b, phi_w)


def em_iteration(model: PldaModel, stats: DatasetStats, variant="kaldi", jitter=None,
                 events=None, iteration=0) -> PldaModel:
    """One E-step over all classes followed by one M-step."""
    prec_b = _precision_of_between(model.phi_b, jitter, events, iteration)
    prec_w = inverse_spd(model.phi_w)
    centered = np.ascontiguousarray(stats.means - model.mu)
    sum_b, sum_w = _backend.kernels(stats.dim).em_sweep(prec_b, prec_w, stats.counts, centered)
    phi_b, phi_w = _finish_m_step(sum_b, sum_w, stats, variant, jitter, events, iteration)
    return PldaModel(model.mu, phi_b, phi_w)


def _record(model, ll, sample_ll):
    pb = pivots_squared(model.phi_b)
    pw = pivots_squared(model.phi_w)
    return IterationRecord(
        log_likelihood=ll,
        sample_log_likelihood=sample_ll,
        phi_b_trace=float(np.trace(model.phi_b)),
        phi_w_trace=float(np.trace(model.phi_w)),
        phi_b_min_pivot2=float(pb.min()),
        phi_w_min_pivot2=float(pw.min()),
    )


def train_from_stats(stats: DatasetStats, config: TrainConfig | None = None, model=None):
    """EM on precomputed statistics; ``mu`` stays at ``stats.mu`` throughout."""
    config = config or TrainConfig()
    report = TrainReport(variant=config.variant)
    if model is None:
        model = initial_model(stats, config.init, config.jitter, report.jitter_events)
    report.initial_log_likelihood = objective(model, stats, config.variant)
    prev = report.initial_log_likelihood
    for it in range(1, config.iterations + 1):
        model = em_iteration(model, stats, config.variant, config.jitter, report.jitter_events, it)
        sample_ll = log_likelihood(model, stats)
        ll = sample_ll if config.variant == "kaldi" else objective(model, stats, config.variant)
        if not math.isfinite(ll):
            raise NonFiniteLikelihood(
                f"log-likelihood is {ll} after iteration {it}: "
                f"trace(phi_b)={np.trace(model.phi_b):.6g}, trace(phi_w)={np.trace(model.phi_w):.6g}"
            )
        report.iterations.append(_record(model, ll, sample_ll))
        log.debug("iteration %d: log-likelihood %.10g", it, ll)
        if config.tolerance > 0 and math.isfinite(prev) and (ll - prev) / abs(prev) < config.tolerance:
            break
        prev = ll
    return model, report


def em_train(data: LabeledDataset, config: TrainConfig | None = None):
    """Accumulate statistics once, then run EM. Returns ``(model, report)``."""
    return train_from_stats(accumulate_stats(data), config)
