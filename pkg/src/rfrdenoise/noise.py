"""Noise synthesis: AWGN (known or blind sigma) and ISP-pipeline noise.

All functions are pure given (input, spec, generator); callers own the
seeded numpy Generator. Sigma is in [0,1] image units throughout; the CLI
converts from the 0-255 scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np


def default_gammas(count: int = 201, lo: float = 1.0 / 3.0, hi: float = 3.0):
    """Log-uniform grid of gamma exponents standing in for a CRF library."""
    return np.exp(np.linspace(np.log(lo), np.log(hi), count))


@dataclass(frozen=True)
class GaussianKnown:
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class GaussianBlind:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 <= self.lo <= self.hi:
            raise ValueError(f"need 0 <= lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class CrfParams:
    """Gamma-curve family f(x) = x**gamma on [0,1]; one gamma drawn per call."""

    gammas: Tuple[float, ...] = field(default_factory=lambda: tuple(default_gammas()))

    def __post_init__(self):
        if any(g <= 0 for g in self.gammas):
            raise ValueError("all gamma exponents must be > 0")


@dataclass(frozen=True)
class Isp:
    crf: CrfParams = field(default_factory=CrfParams)
    shot: Tuple[float, float] = (1e-4, 1e-2)
    read: Tuple[float, float] = (1e-6, 1e-4)

    def __post_init__(self):
        for name, (lo, hi) in (("shot", self.shot), ("read", self.read)):
            if not 0 <= lo <= hi:
                raise ValueError(f"{name} range must satisfy 0 <= lo <= hi")


NoiseSpec = Union[GaussianKnown, GaussianBlind, Isp]


def add_awgn(image: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """image + N(0, sigma^2) i.i.d. per element. Not clamped."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return image
    noise = rng.normal(0.0, sigma, size=image.shape)
    return (image + noise).astype(image.dtype)


def sample_sigma(spec: GaussianBlind, rng: np.random.Generator) -> float:
    return float(rng.uniform(spec.lo, spec.hi))


def add_isp_noise(image: np.ndarray, spec: Isp, rng: np.random.Generator) -> np.ndarray:
    """Heteroscedastic shot+read noise applied in (inverse-CRF) raw space.

    raw = f^-1(image); var = read + shot * raw; raw' = raw + N(0, var);
    output = f(clip(raw', 0, 1)). A fresh CRF gamma is drawn every call.
    """
    if image.min() < -1e-6 or image.max() > 1 + 1e-6:
        raise ValueError(
            f"ISP noise needs image in [0,1], got range "
            f"[{image.min():.4g}, {image.max():.4g}]"
        )
    gamma = float(spec.crf.gammas[rng.integers(len(spec.crf.gammas))])
    lam_shot = float(rng.uniform(*spec.shot))
    lam_read = float(rng.uniform(*spec.read))
    raw = np.clip(image, 0.0, 1.0) ** (1.0 / gamma)
    var = lam_read + lam_shot * raw
    noisy_raw = raw + rng.normal(size=image.shape) * np.sqrt(var)
    return (np.clip(noisy_raw, 0.0, 1.0) ** gamma).astype(image.dtype)


def realize(image: np.ndarray, spec: NoiseSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw one corrupted version of image under spec."""
    if isinstance(spec, GaussianKnown):
        return add_awgn(image, spec.sigma, rng)
    if isinstance(spec, GaussianBlind):
        return add_awgn(image, sample_sigma(spec, rng), rng)
    if isinstance(spec, Isp):
        return add_isp_noise(image, spec, rng)
    raise TypeError(f"unknown noise spec {type(spec).__name__}")
