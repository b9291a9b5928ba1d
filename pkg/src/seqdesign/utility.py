"""Design utilities evaluated over a finite set of candidate settings.

Every algorithm scores a candidate by how much parameter uncertainty spreads
the predicted measurement relative to the noise.  One set of ``N_s``
parameter draws (and, for KLD, noise draws) is shared by all candidates, so
the utility curve is smooth in the setting and the draws cost ``O(N_s)``
rather than ``O(N_s * N_d)``.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .entropy import EntropyEstimatorKind, normal_entropy, spacing_entropy_sorted
from .models import MeasurementModel, NoiseSpec, as_design_array, eval_grid
from .particle_filter import ParticleFilter

LOG_2PI_E = float(np.log(2 * np.pi * np.e))


class Algorithm(str, enum.Enum):
    KLD = "kld"
    VARIANCE = "variance"
    PSEUDO = "pseudo"
    MAXMIN = "maxmin"
    RANDOM = "random"


DEFAULT_SAMPLES = {Algorithm.MAXMIN: 2}


class DesignSpace:
    """Ordered, finite list of distinct candidate settings."""

    def __init__(self, settings):
        arr = as_design_array(settings)
        if np.unique(arr, axis=0).shape[0] != arr.shape[0]:
            raise ValueError("candidate settings must be distinct")
        self.settings = arr

    @classmethod
    def linspace(cls, start: float, stop: float, num: int) -> "DesignSpace":
        return cls(np.linspace(start, stop, num))

    @classmethod
    def arange(cls, start: float, stop: float, step: float) -> "DesignSpace":
        n = int(round((stop - start) / step)) + 1
        return cls(np.round(start + step * np.arange(n), 12))

    def __len__(self):
        return self.settings.shape[0]

    def __getitem__(self, i):
        return self.settings[i]


@dataclass(frozen=True)
class UtilityConfig:
    algorithm: Algorithm = Algorithm.KLD
    n_samples: int | None = None
    entropy_estimator: EntropyEstimatorKind = field(default_factory=EntropyEstimatorKind)
    reuse_samples: bool = True

    def __post_init__(self):
        object.__setattr__(self, "algorithm", Algorithm(self.algorithm))
        if self.n_samples is None:
            object.__setattr__(self, "n_samples", DEFAULT_SAMPLES.get(self.algorithm, 1000))
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be >= 2, got {self.n_samples}")
        if self.algorithm in (Algorithm.KLD, Algorithm.PSEUDO) and self.n_samples < 4:
            raise ValueError("entropy-based utilities need n_samples >= 4")

    @property
    def label(self) -> str:
        if self.algorithm is Algorithm.RANDOM:
            return "random"
        return f"{self.algorithm.value}@{self.n_samples}"


@dataclass
class UtilityResult:
    utilities: np.ndarray
    best_index: int
    timing: dict = field(default_factory=dict)


def simulate_outcomes(model: MeasurementModel, pf: ParticleFilter, noise: NoiseSpec,
                      designs: DesignSpace, cfg: UtilityConfig, rng,
                      with_noise: bool = False, timing: dict | None = None) -> np.ndarray:
    """Simulated outcomes ``y'[i, j]`` for design ``i`` and draw ``j``.

    With ``cfg.reuse_samples`` one set of parameter (and noise) draws serves
    all designs; otherwise every design gets its own fresh set.
    """
    timing = {} if timing is None else timing
    n_s, n_d = cfg.n_samples, len(designs)
    t0 = time.perf_counter()
    if cfg.reuse_samples:
        thetas = pf.sample_parameters(n_s, rng)
        eta = rng.normal(0.0, noise.sigma_eta, n_s) if with_noise else None
    else:
        thetas = pf.sample_parameters(n_s * n_d, rng).reshape(n_d, n_s, pf.dim)
        eta = rng.normal(0.0, noise.sigma_eta, (n_d, n_s)) if with_noise else None
    t1 = time.perf_counter()
    if cfg.reuse_samples:
        y = eval_grid(model, thetas, designs)
    else:
        y = model._mean(thetas, designs.settings[:, None, :])
    if eta is not None:
        y += eta
    t2 = time.perf_counter()
    timing["sampling"] = timing.get("sampling", 0.0) + (t1 - t0)
    timing["model_eval"] = timing.get("model_eval", 0.0) + (t2 - t1)
    return y


def utility_kld(outcomes, noise: NoiseSpec, est: EntropyEstimatorKind = EntropyEstimatorKind(),
                timing: dict | None = None):
    """Entropy of noisy predicted outcomes minus the noise entropy."""
    t0 = time.perf_counter()
    h = spacing_entropy_sorted(np.sort(outcomes, axis=-1), est)
    t1 = time.perf_counter()
    u = np.asarray(h) - normal_entropy(noise.variance)
    if timing is not None:
        timing["entropy"] = timing.get("entropy", 0.0) + (t1 - t0)
        timing["statistic"] = timing.get("statistic", 0.0) + (time.perf_counter() - t1)
    return u


def utility_variance(outcomes, noise: NoiseSpec, timing: dict | None = None):
    """``0.5 log(1 + Var(f) / v_eta)`` with the population variance over draws."""
    t0 = time.perf_counter()
    u = 0.5 * np.log1p(np.var(outcomes, axis=-1) / noise.variance)
    if timing is not None:
        timing["statistic"] = timing.get("statistic", 0.0) + (time.perf_counter() - t0)
    return u


def utility_pseudo(outcomes, noise: NoiseSpec, est: EntropyEstimatorKind = EntropyEstimatorKind(),
                   timing: dict | None = None):
    """Variance utility with the variance replaced by the entropy-equivalent variance."""
    t0 = time.perf_counter()
    h = spacing_entropy_sorted(np.sort(outcomes, axis=-1), est)
    t1 = time.perf_counter()
    v_h = np.exp(2.0 * np.asarray(h) - LOG_2PI_E)
    u = 0.5 * np.log1p(v_h / noise.variance)
    if timing is not None:
        timing["entropy"] = timing.get("entropy", 0.0) + (t1 - t0)
        timing["statistic"] = timing.get("statistic", 0.0) + (time.perf_counter() - t1)
    return u


def utility_maxmin(outcomes, noise: NoiseSpec, timing: dict | None = None):
    """``0.5 log(1 + range^2 / v_eta)`` where range is max - min over draws."""
    t0 = time.perf_counter()
    t = np.ptp(outcomes, axis=-1)
    u = 0.5 * np.log1p(t * t / noise.variance)
    if timing is not None:
        timing["statistic"] = timing.get("statistic", 0.0) + (time.perf_counter() - t0)
    return u


def select_design(utilities, rng) -> int:
    """Index of the maximum utility, ties broken uniformly at random."""
    u = np.asarray(utilities, dtype=float)
    if u.size == 0 or not np.all(np.isfinite(u)):
        raise ValueError("utilities must be a non-empty finite array")
    winners = np.flatnonzero(u == u.max())
    if winners.size == 1:
        return int(winners[0])
    return int(winners[rng.integers(winners.size)])


def random_design(designs, rng) -> int:
    n = len(designs)
    if n < 1:
        raise ValueError("design space is empty")
    return int(rng.integers(n))


def compute_utilities(model: MeasurementModel, pf: ParticleFilter, noise: NoiseSpec,
                      designs: DesignSpace, cfg: UtilityConfig, rng, tie_rng=None) -> UtilityResult:
    """Run one design step: score every candidate and pick the best one.

    ``rng`` supplies the parameter/noise draws; ``tie_rng`` (default ``rng``)
    is consumed only after all utilities are known.
    """
    tie_rng = rng if tie_rng is None else tie_rng
    timing = {"sampling": 0.0, "model_eval": 0.0, "statistic": 0.0, "entropy": 0.0, "argmax": 0.0}
    t0 = time.perf_counter()
    algo = cfg.algorithm
    if algo is Algorithm.RANDOM:
        u = np.zeros(len(designs))
        ta = time.perf_counter()
        best = random_design(designs, rng)
        timing["argmax"] = time.perf_counter() - ta
        timing["total"] = time.perf_counter() - t0
        return UtilityResult(u, best, timing)
    y = simulate_outcomes(model, pf, noise, designs, cfg, rng,
                          with_noise=algo is Algorithm.KLD, timing=timing)
    if algo is Algorithm.KLD:
        u = utility_kld(y, noise, cfg.entropy_estimator, timing)
    elif algo is Algorithm.VARIANCE:
        u = utility_variance(y, noise, timing)
    elif algo is Algorithm.PSEUDO:
        u = utility_pseudo(y, noise, cfg.entropy_estimator, timing)
    else:
        u = utility_maxmin(y, noise, timing)
    ta = time.perf_counter()
    best = select_design(u, tie_rng)
    timing["argmax"] = time.perf_counter() - ta
    timing["total"] = time.perf_counter() - t0
    return UtilityResult(u, best, timing)
