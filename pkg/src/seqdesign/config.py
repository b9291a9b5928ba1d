"""JSON run-configuration files.

Layout (every section optional, unknown keys rejected)::

    {
      "experiment": {"preset": "lorentzian", "constants": {...}, "true_params": {...},
                     "prior": {...}, "designs": {...}, "noise": {"sigma": ...}},
      "filter":     {"n_particles": 5000, "resample_ratio": 0.5, "alpha": 0.01},
      "utility":    {"algorithm": "kld", "n_samples": 1000, "estimator": "ebrahimi",
                     "m": null, "reuse": true},
      "run":        {"n_epochs": 1000, "n_runs": 100, "base_seed": 0},
      "output":     {"directory": "results", "formats": ["csv", "json"]}
    }
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

from .entropy import EntropyEstimatorKind, Estimator
from .experiments import Preset, build_preset
from .runner import ExperimentSpec
from .utility import Algorithm, UtilityConfig


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


SCHEMA = {
    "experiment": {"preset", "constants", "true_params", "prior", "designs", "noise"},
    "filter": {"n_particles", "resample_ratio", "alpha"},
    "utility": {"algorithm", "n_samples", "estimator", "m", "reuse"},
    "run": {"n_epochs", "n_runs", "base_seed"},
    "output": {"directory", "formats"},
}

DEFAULTS = {
    "experiment": {"preset": "lorentzian"},
    "filter": {"n_particles": 5000, "resample_ratio": 0.5, "alpha": 0.01},
    "utility": {"algorithm": "kld", "n_samples": None, "estimator": "ebrahimi", "m": None, "reuse": True},
    "run": {"n_epochs": 1000, "n_runs": 100, "base_seed": 0},
    "output": {"directory": "results", "formats": ["csv", "json"]},
}

OUTPUT_FORMATS = {"csv", "json"}


@dataclass
class RunConfig:
    raw: dict
    preset: Preset
    spec: ExperimentSpec
    n_runs: int
    base_seed: int
    out_dir: Path
    formats: tuple


def _check_keys(doc: dict) -> None:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    for section, body in doc.items():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section {section!r}")
        if not isinstance(body, dict):
            raise ConfigError(f"section {section!r} must be an object")
        extra = set(body) - SCHEMA[section]
        if extra:
            raise ConfigError(f"unknown key(s) {sorted(extra)} in section {section!r}")


def merge(doc: dict, overrides: dict | None = None) -> dict:
    """Defaults <- file document <- overrides (``{"section.key": value}``)."""
    _check_keys(doc)
    out = copy.deepcopy(DEFAULTS)
    for section, body in doc.items():
        out[section].update(body)
    for dotted, value in (overrides or {}).items():
        section, key = dotted.split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown field {dotted!r}")
        if value is not None:
            out[section][key] = value
    return out


def _positive_int(value, field: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{field} must be an integer >= {minimum}, got {value!r}")
    return value


def build(doc: dict) -> RunConfig:
    """Validate a merged document and build the experiment spec."""
    exp, flt, utl, run, out = (doc[k] for k in ("experiment", "filter", "utility", "run", "output"))
    # an empty sub-section keeps the preset default
    sub = {k: v for k, v in exp.items() if k != "preset" and v != {}}
    try:
        preset = build_preset(exp.get("preset"), sub)
    except KeyError as exc:
        raise ConfigError(f"experiment: missing field {exc} in an overridden section "
                          f"({', '.join(sorted(sub)) or 'none'})") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"experiment: {exc}") from exc

    try:
        algorithm = Algorithm(str(utl["algorithm"]).lower())
    except ValueError:
        raise ConfigError(f"utility.algorithm: unknown algorithm {utl['algorithm']!r}; "
                          f"choose from {[a.value for a in Algorithm]}") from None
    try:
        estimator = EntropyEstimatorKind(Estimator(str(utl["estimator"]).lower()), utl["m"])
    except ValueError as exc:
        raise ConfigError(f"utility.estimator: {exc}") from None
    n_samples = utl["n_samples"]
    if n_samples is not None:
        _positive_int(n_samples, "utility.n_samples", 2)
    if not isinstance(utl["reuse"], bool):
        raise ConfigError("utility.reuse must be true or false")
    try:
        ucfg = UtilityConfig(algorithm, n_samples, estimator, utl["reuse"])
    except ValueError as exc:
        raise ConfigError(f"utility.n_samples: {exc}") from None

    n_particles = _positive_int(flt["n_particles"], "filter.n_particles", 2)
    ratio, alpha = flt["resample_ratio"], flt["alpha"]
    if not isinstance(ratio, (int, float)) or not 0 < ratio <= 1:
        raise ConfigError(f"filter.resample_ratio must lie in (0, 1], got {ratio!r}")
    if not isinstance(alpha, (int, float)) or not alpha > 0:
        raise ConfigError(f"filter.alpha must be positive, got {alpha!r}")
    n_epochs = _positive_int(run["n_epochs"], "run.n_epochs")
    n_runs = _positive_int(run["n_runs"], "run.n_runs")
    base_seed = _positive_int(run["base_seed"], "run.base_seed", 0)
    formats = tuple(out["formats"])
    if not set(formats) <= OUTPUT_FORMATS:
        raise ConfigError(f"output.formats must be a subset of {sorted(OUTPUT_FORMATS)}")

    spec = ExperimentSpec(
        model=preset.model, true_params=preset.true_params, noise=preset.noise,
        designs=preset.designs, prior_sampler=preset.prior, n_particles=n_particles,
        n_epochs=n_epochs, utility_cfg=ucfg, seed=base_seed,
        resample_ratio=float(ratio), jitter_alpha=float(alpha),
    )
    return RunConfig(doc, preset, spec, n_runs, base_seed, Path(out["directory"]), formats)


def load(path=None, overrides: dict | None = None) -> RunConfig:
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return build(merge(doc, overrides))
