"""Weighted particle representation of a parameter distribution.

Weights are updated by Bayes rule in log space, the effective sample size
is checked after every update, and multinomial resampling is followed by a
Gaussian jitter with covariance ``alpha * C`` where ``C`` is the weighted
covariance of the ensemble before resampling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .entropy import EntropyEstimatorKind, spacing_entropy
from .models import MeasurementModel, NoiseSpec, gaussian_log_likelihood

JITTER_EPS = 1e-9


class DegenerateUpdateError(RuntimeError):
    """All particles received zero (or non-finite) likelihood."""


@dataclass
class PosteriorSummary:
    mean: np.ndarray
    covariance: np.ndarray
    marginal_std: np.ndarray
    marginal_entropy: np.ndarray | None = None


class ParticleFilter:
    """Weighted ensemble of ``n_particles`` parameter vectors.

    Parameters
    ----------
    particles : array_like, shape (N_p, D)
        Initial parameter vectors.
    weights : array_like, optional
        Initial weights; uniform if omitted.
    resample_threshold_ratio : float
        Resample when ``N_eff < ratio * N_p``.
    jitter_alpha : float
        Scale of the post-resampling jitter covariance.
    rng : numpy.random.Generator
        Stream used for resampling and jitter.
    """

    def __init__(self, particles, weights=None, resample_threshold_ratio=0.5,
                 jitter_alpha=0.01, rng=None):
        particles = np.array(particles, dtype=float)
        if particles.ndim == 1:
            particles = particles[:, None]
        n = particles.shape[0]
        if n < 2:
            raise ValueError(f"need at least 2 particles, got {n}")
        if not 0 < resample_threshold_ratio <= 1:
            raise ValueError("resample_threshold_ratio must lie in (0, 1]")
        if not jitter_alpha > 0:
            raise ValueError("jitter_alpha must be positive")
        if weights is None:
            weights = np.full(n, 1.0 / n)
        else:
            weights = np.array(weights, dtype=float)
            if weights.shape != (n,) or np.any(weights < 0) or not weights.sum() > 0:
                raise ValueError("weights must be non-negative with positive sum, one per particle")
            weights = weights / weights.sum()
        self.particles = particles
        self.weights = weights
        self.resample_threshold_ratio = float(resample_threshold_ratio)
        self.jitter_alpha = float(jitter_alpha)
        self.rng = np.random.default_rng() if rng is None else rng
        self.n_resamples = 0

    @classmethod
    def from_prior(cls, prior_sampler: Callable, n_particles: int, prior_rng, **kwargs):
        """Draw ``n_particles`` independent prior samples with uniform weights.

        ``prior_sampler(prior_rng, n)`` must return an ``(n, D)`` array; the
        remaining keyword arguments go to the constructor.
        """
        if n_particles < 2:
            raise ValueError(f"n_particles must be >= 2, got {n_particles}")
        particles = np.asarray(prior_sampler(prior_rng, n_particles), dtype=float)
        if particles.ndim == 1:
            particles = particles[:, None]
        if particles.shape[0] != n_particles:
            raise ValueError("prior sampler returned the wrong number of samples")
        return cls(particles, **kwargs)

    @property
    def n_particles(self) -> int:
        return self.particles.shape[0]

    @property
    def dim(self) -> int:
        return self.particles.shape[1]

    def effective_sample_size(self) -> float:
        return 1.0 / float(np.dot(self.weights, self.weights))

    def mean(self) -> np.ndarray:
        return self.weights @ self.particles

    def covariance(self) -> np.ndarray:
        centered = self.particles - self.mean()
        cov = (centered * self.weights[:, None]).T @ centered
        return 0.5 * (cov + cov.T)

    def reweight(self, log_likelihood) -> None:
        """Multiply weights by ``exp(log_likelihood)`` and renormalize."""
        ll = np.asarray(log_likelihood, dtype=float)
        with np.errstate(divide="ignore"):
            lw = np.log(self.weights) + ll
        top = np.max(lw)
        if not np.isfinite(top):
            raise DegenerateUpdateError(
                "no particle has finite posterior weight; prior or noise model is mis-specified")
        w = np.exp(lw - top)
        total = w.sum()
        if not (total > 0 and np.isfinite(total)):
            raise DegenerateUpdateError("unnormalized weights underflowed or overflowed")
        self.weights = w / total

    def bayes_update(self, y: float, d, model: MeasurementModel, noise: NoiseSpec) -> bool:
        """Condition on measurement ``y`` taken at setting ``d``.

        Returns True when the update triggered a resample.
        """
        mean = model.eval(self.particles, np.asarray(d, dtype=float))
        self.reweight(gaussian_log_likelihood(y, mean, noise))
        return self.maybe_resample()

    def needs_resample(self) -> bool:
        return self.effective_sample_size() < self.resample_threshold_ratio * self.n_particles

    def maybe_resample(self) -> bool:
        if self.needs_resample():
            self.resample()
            return True
        return False

    def _jitter_cholesky(self, cov: np.ndarray) -> np.ndarray:
        scaled = self.jitter_alpha * cov
        try:
            return np.linalg.cholesky(scaled)
        except np.linalg.LinAlgError:
            scale = np.maximum(np.abs(self.mean()), 1.0)
            diag = np.maximum(np.diag(cov), (JITTER_EPS * scale) ** 2)
            return np.diag(np.sqrt(self.jitter_alpha * diag))

    def resample(self) -> None:
        """Multinomial resampling followed by Gaussian jitter."""
        cov = self.covariance()
        chol = self._jitter_cholesky(cov)
        n = self.n_particles
        idx = self.rng.choice(n, size=n, p=self.weights)
        kicks = self.rng.standard_normal((n, self.dim)) @ chol.T
        self.particles = self.particles[idx] + kicks
        self.weights = np.full(n, 1.0 / n)
        self.n_resamples += 1

    def sample_parameters(self, n_samples: int, rng) -> np.ndarray:
        """Weighted draws with replacement, shape ``(n_samples, D)``."""
        idx = rng.choice(self.n_particles, size=n_samples, p=self.weights)
        return self.particles[idx]

    def summarize(self, rng=None, n_draws: int = 10_000,
                  estimator: EntropyEstimatorKind | None = None) -> PosteriorSummary:
        """Weighted moments; marginal entropies only when ``rng`` is given."""
        cov = self.covariance()
        std = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        ent = None
        if rng is not None:
            draws = self.sample_parameters(n_draws, rng)
            ent = np.atleast_1d(spacing_entropy(draws.T, estimator or EntropyEstimatorKind()))
        return PosteriorSummary(self.mean(), cov, std, ent)

    def snapshot(self) -> dict:
        """Particles, weights and generator state as plain Python objects."""
        return {
            "particles": self.particles.tolist(),
            "weights": self.weights.tolist(),
            "rng_state": self.rng.bit_generator.state,
        }
