"""Command-line front end.

``seqdesign run``      batch of runs for one utility algorithm
``seqdesign compare``  matched batches for several algorithms
``seqdesign fig1``     sample-reuse demonstration table

Per-epoch traces go to CSV, nested summaries and timings to JSON.  The
worker-process count is read from ``SEQDESIGN_WORKERS``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as config_mod
from .config import ConfigError
from .experiments import reuse_demo
from .metrics import BatchSummary, summarize_batch
from .runner import TIMING_KEYS, RunRecord, run_many
from .utility import Algorithm, UtilityConfig

log = logging.getLogger("seqdesign")

US = 1e6


def _fmt(v: float) -> str:
    return repr(float(v))


def trace_header(param_names, setting_names) -> list:
    cols = ["run", "epoch", *setting_names, "y"]
    for prefix in ("mean", "std", "entropy"):
        cols += [f"{prefix}_{p}" for p in param_names]
    return cols + ["resampled"]


def timing_header() -> list:
    return ["run", "epoch", "t_model_us", "t_stat_us", "t_update_us",
            "t_sampling_us", "t_entropy_us", "t_argmax_us", "t_design_us", "t_resample_us"]


def write_traces(path: Path, records: list, model) -> None:
    """Deterministic per-epoch columns; one row per (run, epoch)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(model.param_names, model.setting_names))
        for run_idx, rec in enumerate(records):
            for e in range(rec.n_epochs):
                w.writerow([run_idx, e + 1, *map(_fmt, rec.settings[e]), _fmt(rec.y[e]),
                            *map(_fmt, rec.mean[e]), *map(_fmt, rec.std[e]),
                            *map(_fmt, rec.entropy[e]), int(rec.resampled[e])])


def write_timing(path: Path, records: list) -> None:
    """Per-epoch subtask durations in integer microseconds."""
    order = ("model_eval", None, "bayes_update", "sampling", "entropy", "argmax",
             "design_total", "resample")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(timing_header())
        for run_idx, rec in enumerate(records):
            t = rec.timing
            for e in range(rec.n_epochs):
                row = []
                for key in order:
                    # the statistic column covers every per-design reduction
                    sec = t["statistic"][e] + t["entropy"][e] if key is None else t[key][e]
                    row.append(int(round(sec * US)))
                w.writerow([run_idx, e + 1, *row])


def timing_report(summary: BatchSummary) -> dict:
    mean = summary.mean_timing()
    return {"unit": "us_per_run", **{k: int(round(mean[k] * US)) for k in TIMING_KEYS}}


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def execute(cfg, label: str | None = None):
    """Run a configured batch and return ``(records, summary)``."""
    records = run_many(cfg.spec, cfg.n_runs, cfg.base_seed)
    return records, summarize_batch(records, cfg.spec)


def _overrides(args) -> dict:
    ov = {
        "experiment.preset": args.preset,
        "utility.algorithm": getattr(args, "utility", None),
        "utility.n_samples": args.n_samples,
        "run.n_epochs": args.n_epochs,
        "run.n_runs": args.n_runs,
        "run.base_seed": args.seed,
        "output.directory": args.out,
    }
    if args.no_reuse:
        ov["utility.reuse"] = False
    return ov


def cmd_run(args) -> int:
    cfg = config_mod.load(args.config, _overrides(args))
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    records, summary = execute(cfg)
    wall = time.perf_counter() - t0
    if "csv" in cfg.formats:
        write_traces(out / "epochs.csv", records, cfg.spec.model)
        write_timing(out / "epoch_timing.csv", records)
    if "json" in cfg.formats:
        _write_json(out / "summary.json", summary.to_dict())
        _write_json(out / "timing.json", timing_report(summary))
    final = ", ".join(f"{p}={s:.4g}" for p, s in zip(summary.param_names, summary.std_mean[-1]))
    print(f"{cfg.spec.utility_cfg.label}: {summary.n_runs}/{cfg.n_runs} runs ok, "
          f"final mean std {final}, wall {wall:.1f} s")
    return 0 if summary.n_failed == 0 else 1


def parse_algorithm(token: str) -> UtilityConfig:
    """``name`` or ``name@n_samples``, e.g. ``maxmin@2``."""
    name, _, ns = token.strip().partition("@")
    try:
        algo = Algorithm(name.lower())
    except ValueError:
        raise ConfigError(f"utility.algorithm: unknown algorithm {name!r}") from None
    return UtilityConfig(algo, int(ns) if ns else None)


def cmd_compare(args) -> int:
    tokens = [t for t in args.algorithms.split(",") if t.strip()]
    if len(tokens) < 2:
        raise ConfigError("algorithms: compare needs at least two algorithms")
    cfg = config_mod.load(args.config, _overrides(args))
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    stats_rows, timing_rows, settings_rows = [], [], []
    status = 0
    for token in tokens:
        ucfg = parse_algorithm(token)
        ucfg = replace(ucfg, entropy_estimator=cfg.spec.utility_cfg.entropy_estimator,
                       reuse_samples=cfg.spec.utility_cfg.reuse_samples)
        run_cfg = replace(cfg, spec=replace(cfg.spec, utility_cfg=ucfg))
        records, summary = execute(run_cfg)
        status |= summary.n_failed > 0
        label = ucfg.label
        for e in range(summary.n_epochs):
            for k, p in enumerate(summary.param_names):
                stats_rows.append([label, e + 1, p, *(_fmt(getattr(summary, a)[e, k]) for a in (
                    "std_mean", "std_q05", "std_q95", "entropy_mean", "entropy_q05",
                    "entropy_q95", "rms_error"))])
        for key, us in timing_report(summary).items():
            if key != "unit":
                timing_rows.append([label, key, us])
        for r, rec in enumerate(records):
            for e in range(rec.n_epochs):
                settings_rows.append([label, r, e + 1, *map(_fmt, rec.settings[e])])
        print(f"{label}: final mean std " + ", ".join(
            f"{p}={s:.4g}" for p, s in zip(summary.param_names, summary.std_mean[-1])))
    names = cfg.spec.model.setting_names
    _write_csv(out / "compare_stats.csv",
               ["algorithm", "epoch", "param", "std_mean", "std_q05", "std_q95",
                "entropy_mean", "entropy_q05", "entropy_q95", "rms_error"], stats_rows)
    _write_csv(out / "compare_timing.csv", ["algorithm", "subtask", "us_per_run"], timing_rows)
    _write_csv(out / "compare_settings.csv", ["algorithm", "run", "epoch", *names], settings_rows)
    return int(status)


def _write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_fig1(args) -> int:
    n_s = args.n_samples or 100
    if n_s < 4:
        raise ConfigError("n_samples: the entropy estimator needs at least 4 samples")
    out = Path(args.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    outcome_rows, utility_rows = [], []
    for mode, reuse in (("reuse", True), ("fresh", False)):
        x, y, u = reuse_demo(n_s, args.n_designs, args.seed or 0, reuse)
        for i in range(len(x)):
            outcome_rows.extend([mode, i, _fmt(x[i]), j, _fmt(y[i, j])] for j in range(n_s))
            utility_rows.append([mode, i, _fmt(x[i]), _fmt(u[i])])
        print(f"{mode}: utility maximum at x = {x[int(np.argmax(u))]:.3f}")
    _write_csv(out / "fig1_outcomes.csv", ["mode", "design", "x", "sample", "y"], outcome_rows)
    _write_csv(out / "fig1_utility.csv", ["mode", "design", "x", "utility"], utility_rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqdesign", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path)
        p.add_argument("--preset", choices=["lorentzian", "ramsey"])
        p.add_argument("--n-samples", type=int)
        p.add_argument("--n-epochs", type=int)
        p.add_argument("--n-runs", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--no-reuse", action="store_true")

    p = sub.add_parser("run", help="run a batch for one utility algorithm")
    common(p)
    p.add_argument("--utility")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="matched batches for several algorithms")
    common(p)
    p.add_argument("--algorithms", default="kld,variance,pseudo,maxmin@2,random",
                   help="comma-separated names, optionally name@n_samples")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fig1", help="sample-reuse demonstration table")
    p.add_argument("--config", type=Path, help="accepted for symmetry; unused")
    p.add_argument("--n-samples", type=int)
    p.add_argument("--n-designs", type=int, default=200)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fig1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"seqdesign: configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"seqdesign: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
