"""Simulated design-measure-analyze runs and batches of runs."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .entropy import EntropyEstimatorKind
from .models import MeasurementModel, NoiseSpec, gaussian_log_likelihood
from .particle_filter import DegenerateUpdateError, ParticleFilter
from .utility import DesignSpace, UtilityConfig, compute_utilities

log = logging.getLogger(__name__)

WORKERS_ENV = "SEQDESIGN_WORKERS"
STREAMS = ("prior", "design", "tiebreak", "noise", "resample", "metrics")
TIMING_KEYS = ("sampling", "model_eval", "statistic", "entropy", "argmax",
               "design_total", "bayes_update", "resample")


@dataclass
class ExperimentSpec:
    model: MeasurementModel
    true_params: np.ndarray
    noise: NoiseSpec
    designs: DesignSpace
    prior_sampler: Callable
    n_particles: int = 5000
    n_epochs: int = 1000
    utility_cfg: UtilityConfig = field(default_factory=UtilityConfig)
    seed: int | tuple = 0
    resample_ratio: float = 0.5
    jitter_alpha: float = 0.01
    metric_draws: int = 10_000
    metric_estimator: EntropyEstimatorKind | None = None

    def __post_init__(self):
        self.true_params = np.atleast_1d(np.asarray(self.true_params, dtype=float))
        if self.true_params.shape != (self.model.param_dim,):
            raise ValueError(f"true_params must have {self.model.param_dim} entries")
        if self.n_epochs < 1:
            raise ValueError(f"n_epochs must be >= 1, got {self.n_epochs}")
        if self.n_particles < 2:
            raise ValueError(f"n_particles must be >= 2, got {self.n_particles}")
        if self.designs.settings.shape[1] != self.model.setting_dim:
            raise ValueError("design settings do not match the model's setting dimension")

    @property
    def estimator(self) -> EntropyEstimatorKind:
        return self.metric_estimator or self.utility_cfg.entropy_estimator


@dataclass
class RunRecord:
    """Per-epoch trace of one run; arrays are truncated to completed epochs."""

    settings: np.ndarray      # (E, S)
    y: np.ndarray             # (E,)
    mean: np.ndarray          # (E, D)
    std: np.ndarray           # (E, D)
    entropy: np.ndarray       # (E, D)
    resampled: np.ndarray     # (E,) bool
    timing: dict              # key -> (E,) seconds
    status: str = "ok"
    seed: int | tuple = 0

    @property
    def n_epochs(self) -> int:
        return self.y.shape[0]

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class RunState:
    pf: ParticleFilter
    rngs: dict
    epoch: int = 0


def make_streams(seed) -> dict:
    """Independent generators per purpose, all derived from ``seed``."""
    ss = np.random.SeedSequence(seed if isinstance(seed, int) else list(seed))
    return {name: np.random.default_rng(child) for name, child in zip(STREAMS, ss.spawn(len(STREAMS)))}


def init_state(spec: ExperimentSpec) -> RunState:
    rngs = make_streams(spec.seed)
    pf = ParticleFilter.from_prior(
        spec.prior_sampler, spec.n_particles, rngs["prior"],
        resample_threshold_ratio=spec.resample_ratio,
        jitter_alpha=spec.jitter_alpha, rng=rngs["resample"],
    )
    return RunState(pf, rngs)


def run_epoch(state: RunState, spec: ExperimentSpec) -> dict:
    """One epoch: choose a setting, simulate a datum, update the posterior."""
    pf, rngs = state.pf, state.rngs
    res = compute_utilities(spec.model, pf, spec.noise, spec.designs, spec.utility_cfg,
                            rngs["design"], rngs["tiebreak"])
    d = spec.designs[res.best_index]
    y = spec.model.eval(spec.true_params, d) + rngs["noise"].normal(0.0, spec.noise.sigma_eta)

    t0 = time.perf_counter()
    mean = spec.model.eval(pf.particles, d)
    pf.reweight(gaussian_log_likelihood(y, mean, spec.noise))
    t1 = time.perf_counter()
    resampled = pf.maybe_resample()
    t2 = time.perf_counter()

    summary = pf.summarize(rngs["metrics"], spec.metric_draws, spec.estimator)
    timing = {k: res.timing.get(k, 0.0) for k in TIMING_KEYS[:5]}
    timing["design_total"] = res.timing["total"]
    timing["bayes_update"] = t1 - t0
    timing["resample"] = t2 - t1
    state.epoch += 1
    return {
        "epoch": state.epoch,
        "setting": np.array(d, dtype=float),
        "y": float(y),
        "mean": summary.mean,
        "std": summary.marginal_std,
        "entropy": summary.marginal_entropy,
        "resampled": resampled,
        "timing": timing,
    }


def run(spec: ExperimentSpec) -> RunRecord:
    """Run ``spec.n_epochs`` epochs from a freshly sampled prior."""
    state = init_state(spec)
    rows = []
    status = "ok"
    for _ in range(spec.n_epochs):
        try:
            rows.append(run_epoch(state, spec))
        except DegenerateUpdateError as exc:
            status = f"degenerate at epoch {state.epoch + 1}: {exc}"
            log.warning("run %s aborted: %s", spec.seed, status)
            break
    return _record(rows, spec, status)


def _record(rows: list, spec: ExperimentSpec, status: str) -> RunRecord:
    d, s = spec.model.param_dim, spec.model.setting_dim
    if rows:
        stack = lambda key: np.array([r[key] for r in rows])
        timing = {k: np.array([r["timing"][k] for r in rows]) for k in TIMING_KEYS}
        return RunRecord(stack("setting").reshape(-1, s), stack("y"), stack("mean"),
                         stack("std"), stack("entropy"), stack("resampled"),
                         timing, status, spec.seed)
    empty = np.empty((0, d))
    return RunRecord(np.empty((0, s)), np.empty(0), empty, empty.copy(), empty.copy(),
                     np.empty(0, bool), {k: np.empty(0) for k in TIMING_KEYS}, status, spec.seed)


def run_seed(base_seed: int, run_index: int) -> tuple:
    return (int(base_seed), int(run_index))


def _worker_count(n_runs: int) -> int:
    try:
        n = int(os.environ.get(WORKERS_ENV, "1"))
    except ValueError:
        n = 1
    return max(1, min(n, n_runs))


def run_many(spec: ExperimentSpec, n_runs: int, base_seed: int = 0, workers: int | None = None) -> list:
    """Independent runs with seeds ``(base_seed, i)``, returned in run order."""
    specs = [replace(spec, seed=run_seed(base_seed, i)) for i in range(n_runs)]
    workers = _worker_count(n_runs) if workers is None else workers
    if workers <= 1:
        return [run(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, specs))


def run_batch(spec: ExperimentSpec, n_runs: int, base_seed: int = 0, workers: int | None = None):
    """Run ``n_runs`` independent runs and aggregate them."""
    from .metrics import summarize_batch

    if n_runs < 2:
        raise ValueError(f"n_runs must be >= 2, got {n_runs}")
    records = run_many(spec, n_runs, base_seed, workers)
    return summarize_batch(records, spec)
