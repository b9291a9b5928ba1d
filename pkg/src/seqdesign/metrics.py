"""Aggregation of run records into per-epoch batch statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .runner import TIMING_KEYS, RunRecord

QUANTILES = (0.05, 0.95)


@dataclass
class BatchSummary:
    """Per-epoch statistics over the successful runs of a batch.

    Arrays indexed ``[epoch, parameter]`` hold the mean and 5%/95% quantiles
    of the posterior std and entropy, and the RMS error of the posterior
    mean against the true parameters.  ``run_std`` and ``settings`` keep the
    per-run traces needed for convergence and settings plots.
    """

    n_runs: int
    n_failed: int
    param_names: tuple
    std_mean: np.ndarray
    std_q05: np.ndarray
    std_q95: np.ndarray
    entropy_mean: np.ndarray
    entropy_q05: np.ndarray
    entropy_q95: np.ndarray
    rms_error: np.ndarray
    run_std: np.ndarray          # (M, E, D)
    settings: np.ndarray         # (M, E, S)
    timing_totals: dict = field(default_factory=dict)   # key -> (M,) seconds per run
    failures: list = field(default_factory=list)

    @property
    def n_epochs(self) -> int:
        return self.std_mean.shape[0]

    def mean_timing(self) -> dict:
        """Mean total seconds per run for each timed subtask."""
        return {k: float(np.mean(v)) if len(v) else float("nan") for k, v in self.timing_totals.items()}

    def to_dict(self) -> dict:
        out = {"n_runs": self.n_runs, "n_failed": self.n_failed,
               "param_names": list(self.param_names), "failures": list(self.failures)}
        for name in ("std_mean", "std_q05", "std_q95", "entropy_mean", "entropy_q05",
                     "entropy_q95", "rms_error"):
            out[name] = getattr(self, name).tolist()
        out["mean_timing_s"] = self.mean_timing()
        return out

    def save(self, path) -> None:
        arrays = {k: getattr(self, k) for k in (
            "std_mean", "std_q05", "std_q95", "entropy_mean", "entropy_q05",
            "entropy_q95", "rms_error", "run_std", "settings")}
        arrays.update({f"timing_{k}": v for k, v in self.timing_totals.items()})
        np.savez_compressed(
            path, n_runs=self.n_runs, n_failed=self.n_failed,
            param_names=np.array(self.param_names), failures=np.array(self.failures, dtype=str),
            **arrays)

    @classmethod
    def load(cls, path) -> "BatchSummary":
        with np.load(path) as z:
            timing = {k[len("timing_"):]: z[k] for k in z.files if k.startswith("timing_")}
            kw = {k: z[k] for k in ("std_mean", "std_q05", "std_q95", "entropy_mean",
                                    "entropy_q05", "entropy_q95", "rms_error", "run_std", "settings")}
            return cls(int(z["n_runs"]), int(z["n_failed"]), tuple(str(p) for p in z["param_names"]),
                       timing_totals=timing, failures=[str(f) for f in z["failures"]], **kw)


def summarize_batch(records: list[RunRecord], spec) -> BatchSummary:
    """Reduce run records (in run order) to a :class:`BatchSummary`.

    Failed or truncated runs are excluded from the aggregates and reported
    in ``failures``.
    """
    good = [r for r in records if r.ok and r.n_epochs == spec.n_epochs]
    failures = [f"{r.seed}: {r.status}" for r in records if not (r.ok and r.n_epochs == spec.n_epochs)]
    if not good:
        raise RuntimeError(f"all {len(records)} runs failed: {failures[:3]}")
    std = np.stack([r.std for r in good])
    ent = np.stack([r.entropy for r in good])
    mean = np.stack([r.mean for r in good])
    err = mean - spec.true_params
    q_std = np.quantile(std, QUANTILES, axis=0)
    q_ent = np.quantile(ent, QUANTILES, axis=0)
    timing = {k: np.array([r.timing[k].sum() for r in good]) for k in TIMING_KEYS}
    return BatchSummary(
        n_runs=len(good),
        n_failed=len(records) - len(good),
        param_names=tuple(spec.model.param_names),
        std_mean=std.mean(axis=0),
        std_q05=q_std[0],
        std_q95=q_std[1],
        entropy_mean=ent.mean(axis=0),
        entropy_q05=q_ent[0],
        entropy_q95=q_ent[1],
        rms_error=np.sqrt(np.mean(err**2, axis=0)),
        run_std=std,
        settings=np.stack([r.settings for r in good]),
        timing_totals=timing,
        failures=failures,
    )
