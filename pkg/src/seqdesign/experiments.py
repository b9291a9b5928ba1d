"""Named experiment presets and prior samplers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import (
    LorentzianModel,
    LorentzianParams,
    MeasurementModel,
    NoiseSpec,
    RamseyModel,
    RamseyParams,
    lorentzian_cramer_rao,
    ramsey_cramer_rao,
)
from .utility import DesignSpace

PRESET_VERSION = 1


@dataclass(frozen=True)
class NormalPrior:
    """Independent (optionally truncated) normal marginals.

    Draws outside ``[lower, upper]`` are rejected and redrawn.
    """

    mean: tuple[float, ...]
    std: tuple[float, ...]
    lower: tuple[float, ...] | None = None
    upper: tuple[float, ...] | None = None

    def __post_init__(self):
        d = len(self.mean)
        if len(self.std) != d or any(not s > 0 for s in self.std):
            raise ValueError("prior needs one positive std per parameter")
        for bound in (self.lower, self.upper):
            if bound is not None and len(bound) != d:
                raise ValueError("prior bounds must have one entry per parameter")

    @property
    def dim(self) -> int:
        return len(self.mean)

    def __call__(self, rng, n: int) -> np.ndarray:
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        lo = np.full(self.dim, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(self.dim, np.inf) if self.upper is None else np.asarray(self.upper, float)
        out = mean + std * rng.standard_normal((n, self.dim))
        bad = np.any((out < lo) | (out > hi), axis=1)
        for _ in range(1000):
            if not bad.any():
                return out
            k = int(bad.sum())
            out[bad] = mean + std * rng.standard_normal((k, self.dim))
            bad = np.any((out < lo) | (out > hi), axis=1)
        raise RuntimeError("prior truncation rejects almost every draw")


@dataclass
class Preset:
    name: str
    model: MeasurementModel
    true_params: np.ndarray
    noise: NoiseSpec
    designs: DesignSpace
    prior: NormalPrior
    constants: dict = field(default_factory=dict)
    version: int = PRESET_VERSION

    def cramer_rao(self, n: int) -> np.ndarray:
        """Reference bound on the std of the key parameter (x0 or omega0)."""
        if self.name == "lorentzian":
            c = self.constants
            p = LorentzianParams(c["b"], c["a"], c["delta"], float(self.true_params[0]))
            return lorentzian_cramer_rao(p, self.noise, n)
        if self.name == "ramsey":
            p = RamseyParams(*map(float, self.true_params))
            return ramsey_cramer_rao(p, self.noise, n)
        raise KeyError(self.name)

    @property
    def key_param(self) -> int:
        return {"lorentzian": 0, "ramsey": 2}.get(self.name, 0)


LORENTZIAN_DEFAULTS = {
    "constants": {"b": 50000.0, "a": -1000.0, "delta": 0.1},
    "true_params": {"x0": 2.6},
    "noise": {"sigma": 1000.0},
    "prior": {"x0": {"mean": 3.0, "std": 0.5}},
    "designs": {"start": 1.5, "stop": 4.5, "num": 200},
}

RAMSEY_DEFAULTS = {
    "constants": {},
    "true_params": {"h": 0.8, "c": 0.13, "omega0": 9.4, "t2": 10.0},
    "noise": {"sigma": 0.13},
    "prior": {
        "h": {"mean": 0.8, "std": 0.2},
        "c": {"mean": 0.13, "std": 0.05},
        "omega0": {"mean": 9.5, "std": 1.0},
        "t2": {"mean": 10.0, "std": 3.0, "lower": 0.5},
    },
    "designs": {"start": 0.1, "stop": 20.0, "step": 0.01},
}

PRESET_DEFAULTS = {"lorentzian": LORENTZIAN_DEFAULTS, "ramsey": RAMSEY_DEFAULTS}


def _design_space(spec: dict) -> DesignSpace:
    if "values" in spec:
        return DesignSpace(spec["values"])
    if "step" in spec:
        return DesignSpace.arange(spec["start"], spec["stop"], spec["step"])
    return DesignSpace.linspace(spec["start"], spec["stop"], spec["num"])


def _prior(model: MeasurementModel, spec: dict) -> NormalPrior:
    names = model.param_names
    missing = set(names) - set(spec)
    extra = set(spec) - set(names)
    if missing or extra:
        raise ValueError(f"prior must cover exactly {names}; missing {sorted(missing)}, unknown {sorted(extra)}")
    entries = [spec[n] for n in names]
    lower = tuple(e.get("lower", -math.inf) for e in entries)
    upper = tuple(e.get("upper", math.inf) for e in entries)
    return NormalPrior(
        mean=tuple(float(e["mean"]) for e in entries),
        std=tuple(float(e["std"]) for e in entries),
        lower=lower if any(math.isfinite(v) for v in lower) else None,
        upper=upper if any(math.isfinite(v) for v in upper) else None,
    )


def build_preset(name: str, overrides: dict | None = None) -> Preset:
    """Build a preset, optionally replacing whole sub-sections of its defaults."""
    if name not in PRESET_DEFAULTS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESET_DEFAULTS)}")
    cfg = {k: v for k, v in PRESET_DEFAULTS[name].items()}
    for key, value in (overrides or {}).items():
        if key not in cfg:
            raise ValueError(f"unknown experiment field {key!r}")
        if value is not None:
            cfg[key] = {**cfg[key], **value} if key in ("constants", "true_params") else value
    if name == "lorentzian":
        c = cfg["constants"]
        model = LorentzianModel(c["b"], c["a"], c["delta"])
    else:
        model = RamseyModel()
    tp = cfg["true_params"]
    if set(tp) != set(model.param_names):
        raise ValueError(f"true_params must name exactly {model.param_names}")
    true_params = np.array([float(tp[n]) for n in model.param_names])
    return Preset(
        name=name,
        model=model,
        true_params=true_params,
        noise=NoiseSpec(float(cfg["noise"]["sigma"])),
        designs=_design_space(cfg["designs"]),
        prior=_prior(model, cfg["prior"]),
        constants=dict(cfg["constants"]),
    )


def lorentzian_preset(**overrides) -> Preset:
    return build_preset("lorentzian", overrides)


def ramsey_preset(**overrides) -> Preset:
    return build_preset("ramsey", overrides)


# Unit-height Lorentzian of width 0.1 used to illustrate sample reuse.
REUSE_DEMO = {
    "x0_mean": 2.6,
    "x0_std": 0.2,
    "sigma": 0.05,
    "x_range": (2.0, 4.0),
    "n_particles": 20_000,
}


def reuse_demo(n_samples: int = 100, n_designs: int = 200, seed: int = 0, reuse: bool = True,
               estimator=None):
    """Simulated outcomes and KLD utility over a setting grid, with or without reuse.

    Returns ``(x, outcomes, utilities)`` with ``outcomes`` shaped ``(n_designs, n_samples)``.
    """
    from .particle_filter import ParticleFilter
    from .utility import Algorithm, UtilityConfig, simulate_outcomes, utility_kld
    from .entropy import EntropyEstimatorKind

    cfg = REUSE_DEMO
    model = LorentzianModel(b=0.0, a=1.0, delta=0.1)
    noise = NoiseSpec(cfg["sigma"])
    designs = DesignSpace.linspace(*cfg["x_range"], n_designs)
    prior = NormalPrior((cfg["x0_mean"],), (cfg["x0_std"],))
    prior_rng, draw_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    pf = ParticleFilter.from_prior(prior, cfg["n_particles"], prior_rng)
    ucfg = UtilityConfig(Algorithm.KLD, n_samples, estimator or EntropyEstimatorKind(), reuse)
    y = simulate_outcomes(model, pf, noise, designs, ucfg, draw_rng, with_noise=True)
    u = utility_kld(y, noise, ucfg.entropy_estimator)
    return designs.settings[:, 0], y, u
