"""Oscillator phase noise, AWGN and the free-space link budget."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .geometry import C_LIGHT

TWO_PI = 2.0 * math.pi


def wiener_increment_std(sigma_df: float, symbol_period: float) -> float:
    """Per-symbol standard deviation of the common phase increment, in radians.

    This is the single place where the linewidth parameter is mapped to a
    random-walk step; everything else calls through here.
    """
    return TWO_PI * sigma_df * symbol_period


@dataclass(frozen=True)
class WienerPhase:
    sigma_df: float
    symbol_period: float
    state: float = 0.0

    def __post_init__(self):
        if self.sigma_df < 0:
            raise InvalidArgumentError("sigma_df must be >= 0")
        if not self.symbol_period > 0:
            raise InvalidArgumentError("symbol period must be positive")

    @property
    def step_std(self) -> float:
        return wiener_increment_std(self.sigma_df, self.symbol_period)


def wiener_step(p: WienerPhase, gaussian_draw: float) -> WienerPhase:
    return replace(p, state=p.state + p.step_std * gaussian_draw)


def wiener_path(p: WienerPhase, n: int, rng: np.random.Generator) -> np.ndarray:
    """States after each of ``n`` steps starting from ``p.state`` (unwrapped)."""
    steps = rng.standard_normal(n)
    return p.state + np.cumsum(p.step_std * steps)


@dataclass(frozen=True)
class FreqOffsetPair:
    df: float
    df_prime: float

    @property
    def mismatch(self) -> float:
        return abs(self.df - self.df_prime)

    def in_regime(self, bandwidth: float) -> bool:
        return self.mismatch < bandwidth


@dataclass(frozen=True)
class LinkBudget:
    p_tx: float
    f_c: float
    noise_var: float
    c: float = C_LIGHT

    def __post_init__(self):
        if not (self.f_c > 0 and self.noise_var > 0 and self.c > 0):
            raise InvalidArgumentError("carrier, noise variance and c must be positive")
        if self.p_tx < 0:
            raise InvalidArgumentError("transmit power must be >= 0")

    @property
    def wavelength(self) -> float:
        return self.c / self.f_c


def dbm_to_watts(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w / 1e-3)


def to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def free_space_gain(d, wavelength: float):
    """Amplitude gain ``lambda/(4 pi d)``; accepts arrays."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise InvalidArgumentError("distance must be positive")
    g = wavelength / (4.0 * math.pi * d_arr)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class SnrReport:
    per_antenna: float
    array: float

    @property
    def per_antenna_db(self) -> float:
        return float(to_db(self.per_antenna))

    @property
    def array_db(self) -> float:
        return float(to_db(self.array))


def snr(budget: LinkBudget, d: float, n_antennas: int = 1) -> SnrReport:
    if n_antennas < 1:
        raise InvalidArgumentError("need at least one antenna")
    gain = free_space_gain(d, budget.wavelength)
    per = budget.p_tx * gain**2 / budget.noise_var
    return SnrReport(per, per * n_antennas)


def awgn(sigma2: float, shape, rng: np.random.Generator) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with variance ``sigma2``."""
    if sigma2 < 0:
        raise InvalidArgumentError("sigma2 must be >= 0")
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return math.sqrt(sigma2 / 2.0) * z
