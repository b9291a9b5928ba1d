"""Measurement models, Gaussian noise likelihood and Cramer-Rao references.

A model maps parameter vectors ``theta`` (last axis = parameters) and
setting vectors ``d`` (last axis = setting components) to the mean
measurement value.  Both arguments broadcast, so a single call can fill
the whole (design x sample) grid used by the utility algorithms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive, normally distributed measurement noise."""

    sigma_eta: float

    def __post_init__(self):
        if not (self.sigma_eta > 0 and math.isfinite(self.sigma_eta)):
            raise ValueError(f"sigma_eta must be positive and finite, got {self.sigma_eta}")

    @property
    def variance(self) -> float:
        return self.sigma_eta**2


@dataclass(frozen=True)
class LorentzianParams:
    b: float
    a: float
    delta: float
    x0: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"half-width delta must be positive, got {self.delta}")


@dataclass(frozen=True)
class RamseyParams:
    h: float
    c: float
    omega0: float
    t2: float

    def __post_init__(self):
        if not self.t2 > 0:
            raise ValueError(f"dephasing time t2 must be positive, got {self.t2}")


class MeasurementModel:
    """Base class for a deterministic mean-value model ``f(theta, d)``.

    Subclasses set ``param_names`` and ``setting_names`` and implement
    :meth:`_mean`, which receives broadcastable arrays whose last axis
    indexes parameters (resp. setting components).
    """

    param_names: tuple[str, ...] = ()
    setting_names: tuple[str, ...] = ()

    @property
    def param_dim(self) -> int:
        return len(self.param_names)

    @property
    def setting_dim(self) -> int:
        return len(self.setting_names)

    def _mean(self, theta: np.ndarray, d: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval(self, theta, d):
        """Mean measurement value; scalar in, scalar out, arrays broadcast."""
        theta = np.asarray(theta, dtype=float)
        d = np.asarray(d, dtype=float)
        if theta.ndim == 0:
            theta = theta[None]
        if d.ndim == 0:
            d = d[None]
        out = self._mean(theta, d)
        return float(out) if np.ndim(out) == 0 else out

    __call__ = eval


class LorentzianModel(MeasurementModel):
    """Lorentzian dip/peak with unknown center ``x0``; ``b``, ``a``, ``delta`` fixed."""

    param_names = ("x0",)
    setting_names = ("x",)

    def __init__(self, b: float, a: float, delta: float):
        if not delta > 0:
            raise ValueError(f"half-width delta must be positive, got {delta}")
        self.b = float(b)
        self.a = float(a)
        self.delta = float(delta)

    def _mean(self, theta, d):
        u = (d[..., 0] - theta[..., 0]) / self.delta
        return self.b + self.a / (u * u + 1.0)

    def __repr__(self):
        return f"LorentzianModel(b={self.b}, a={self.a}, delta={self.delta})"


class RamseyModel(MeasurementModel):
    """Decaying sinusoid ``h + c sin(omega0 tau) exp(-(tau/t2)^2)``, all four unknown."""

    param_names = ("h", "c", "omega0", "t2")
    setting_names = ("tau",)

    def _mean(self, theta, d):
        tau = d[..., 0]
        h, c, w, t2 = (theta[..., k] for k in range(4))
        # in-place chain: this is the hot loop of every design step
        shape = np.broadcast_shapes(w.shape, tau.shape, t2.shape)
        s = np.multiply(w, tau, out=np.empty(shape))
        np.sin(s, out=s)
        r = np.divide(tau, t2, out=np.empty(shape))
        r *= r
        np.negative(r, out=r)
        np.exp(r, out=r)
        s *= r
        s *= c
        s += h
        return s

    def __repr__(self):
        return "RamseyModel()"


def lorentzian_eval(p: LorentzianParams, x):
    u = (np.asarray(x, dtype=float) - p.x0) / p.delta
    out = p.b + p.a / (u * u + 1.0)
    return float(out) if np.ndim(out) == 0 else out


def ramsey_eval(p: RamseyParams, tau):
    tau = np.asarray(tau, dtype=float)
    out = p.h + p.c * np.sin(p.omega0 * tau) * np.exp(-((tau / p.t2) ** 2))
    return float(out) if np.ndim(out) == 0 else out


def gaussian_log_likelihood(y, mean, noise: NoiseSpec):
    """Log density of ``y`` under Normal(mean, sigma_eta^2); broadcasts."""
    r = (np.asarray(y, dtype=float) - np.asarray(mean, dtype=float)) / noise.sigma_eta
    out = -0.5 * r * r - (LOG_SQRT_2PI + math.log(noise.sigma_eta))
    return float(out) if np.ndim(out) == 0 else out


def lorentzian_cramer_rao(p: LorentzianParams, noise: NoiseSpec, n: int) -> float:
    """Lower bound on the standard deviation of ``x0`` after ``n`` measurements."""
    if p.a == 0:
        raise ValueError("amplitude a must be nonzero")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 8.0 / (3.0 * math.sqrt(3.0)) * (p.delta / abs(p.a)) * noise.sigma_eta / math.sqrt(n)


def ramsey_cramer_rao(p: RamseyParams, noise: NoiseSpec, n: int) -> float:
    """Standard deviation of ``omega0`` for ``n`` measurements at the best delay."""
    if p.c == 0:
        raise ValueError("contrast c must be nonzero")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return math.sqrt(2.0 * math.e) / (abs(p.c) * p.t2) * noise.sigma_eta / math.sqrt(n)


def as_design_array(settings: Sequence) -> np.ndarray:
    """Normalize a list of settings to an ``(N_d, setting_dim)`` float array."""
    arr = np.asarray(settings, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError(f"settings must be a non-empty list of setting vectors, got shape {arr.shape}")
    return arr


def eval_grid(model: MeasurementModel, thetas, designs) -> np.ndarray:
    """Model means for every (design, parameter sample) pair, shape ``(N_d, N_s)``.

    ``designs`` may be a :class:`~seqdesign.utility.DesignSpace` or anything
    accepted by :func:`as_design_array`.
    """
    thetas = np.asarray(thetas, dtype=float)
    if thetas.ndim == 1:
        thetas = thetas[:, None]
    d = getattr(designs, "settings", None)
    d = as_design_array(designs if d is None else d)
    if thetas.shape[0] < 1:
        raise ValueError("need at least one parameter sample")
    return model._mean(thetas[None, :, :], d[:, None, :])
