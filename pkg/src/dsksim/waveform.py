"""Ideal sinc pulse, its autocorrelation kernel and sampled synthesis.

Two evaluation paths share this module. The analytic path uses
:func:`kernel` directly; the sampled path builds explicit grids with
:func:`synthesize` and correlates them with :func:`cross_correlate`.

A grid of half-width ``W`` symbol periods captures the pulse energy only up
to the tail ``1 - (2/pi) Si(2 pi W) ~ 1/(pi^2 W)``; :func:`truncation_loss`
returns that number so tests can budget for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import sici

from .errors import DelayOutOfWindowError, InvalidArgumentError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SincPulse:
    bandwidth: float

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise InvalidArgumentError("bandwidth must be positive")

    @property
    def period(self) -> float:
        return 1.0 / self.bandwidth

    @property
    def energy(self) -> float:
        return self.period


@dataclass(frozen=True)
class GridSpec:
    """Sampling layout: rate ``kappa*B`` over ``[-W*T, W*T]``."""

    pulse: SincPulse
    kappa: int = 16
    half_width: int = 64

    def __post_init__(self):
        if int(self.kappa) != self.kappa or self.kappa < 2:
            raise InvalidArgumentError("oversampling factor must be an integer >= 2")
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise InvalidArgumentError("half-width must be a positive integer")

    @property
    def length(self) -> int:
        return 2 * self.half_width * self.kappa + 1

    @property
    def dt(self) -> float:
        return self.pulse.period / self.kappa

    @property
    def sample_rate(self) -> float:
        return self.kappa * self.pulse.bandwidth

    def times(self) -> np.ndarray:
        k = np.arange(self.length) - self.half_width * self.kappa
        return k * self.dt


@dataclass(frozen=True)
class SampleGrid:
    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != (self.spec.length,):
            raise InvalidArgumentError(f"expected {self.spec.length} samples, got {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def energy(self) -> float:
        return float(self.spec.dt * np.sum(np.abs(self.samples) ** 2))


def sinc(x):
    """``sin(x)/x`` with the removable point at 0 handled exactly."""
    return np.sinc(np.asarray(x) / math.pi)


def kernel(pulse: SincPulse, delta):
    """Autocorrelation ``T*sinc(pi*B*delta)`` of the unit sinc pulse."""
    return pulse.period * np.sinc(pulse.bandwidth * np.asarray(delta, dtype=float))


def truncation_loss(half_width: int) -> float:
    """Fraction of pulse energy outside ``[-W*T, W*T]``."""
    si, _ = sici(TWO_PI * half_width)
    return 1.0 - 2.0 * si / math.pi


PhasePath = float | np.ndarray | Callable[[np.ndarray], np.ndarray]


def synthesize(pulse: SincPulse, rho: float, tau: float, f_c: float,
               phase_path: PhasePath = 0.0, spec: GridSpec | None = None) -> SampleGrid:
    """Sample ``rho*exp(-j2pi f_c tau)*exp(j theta(t))*sinc(pi(t-tau)/T)``.

    ``phase_path`` is a constant, an array over the grid, or a callable of
    the sample times (``lambda t: -2*pi*df*t`` for a frequency offset).
    """
    spec = spec or GridSpec(pulse)
    if spec.pulse != pulse:
        raise InvalidArgumentError("grid spec belongs to a different pulse")
    if spec.half_width < 8:
        raise InvalidArgumentError("synthesis needs W >= 8")
    if abs(tau) > spec.half_width * pulse.period / 2:
        raise DelayOutOfWindowError(f"delay {tau} outside half the window")
    if rho < 0:
        raise InvalidArgumentError("rho must be >= 0")
    t = spec.times()
    if callable(phase_path):
        theta = np.asarray(phase_path(t), dtype=float)
    else:
        theta = np.broadcast_to(np.asarray(phase_path, dtype=float), t.shape)
    carrier = np.exp(-1j * TWO_PI * math.fmod(f_c * tau, 1.0))
    samples = rho * carrier * np.exp(1j * theta) * np.sinc((t - tau) / pulse.period)
    return SampleGrid(spec, samples)


def fractional_shift(grid: SampleGrid, shift: float) -> np.ndarray:
    """Band-limited interpolation of ``a(t - shift)`` on the grid's own times.

    Uses the Whittaker-Shannon series over the grid samples, which is exact
    for signals band-limited to the grid's Nyquist rate and supported on it.
    """
    spec = grid.spec
    if shift == 0.0:
        return np.array(grid.samples)
    u = shift / spec.dt
    n = spec.length
    # a(t_n - shift) = sum_k a_k sinc(n - u - k), a convolution with a sinc taper
    taps = np.sinc(np.arange(-(n - 1), n) - u)
    return fftconvolve(grid.samples, taps)[n - 1:2 * n - 1]


def cross_correlate(a: SampleGrid, b: SampleGrid, shift: float) -> complex:
    """``dt * sum_k a(t_k - shift) conj(b(t_k))``."""
    if a.spec != b.spec:
        raise InvalidArgumentError("grids must share rate and span")
    span = a.spec.half_width * a.spec.pulse.period
    if abs(shift) > span:
        raise DelayOutOfWindowError(f"shift {shift} outside the grid span")
    shifted = fractional_shift(a, shift)
    return complex(a.spec.dt * np.vdot(b.samples, shifted))
