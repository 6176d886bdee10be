"""DSK and SSK detectors.

The DSK statistic for candidate ``m`` is

    sum_{i>=1} 1/i * sum_{j<i} Re{ w^m_ij * C^m_ij }

with zero-based antenna indices, ``w^m_ij = exp(-j 2 pi f_c (tau^m_i - tau^m_j))``
and ``C^m_ij`` the correlation of ``r_j`` shifted by ``tau^m_i - tau^m_j``
against ``r_i``. The correlations come either from explicit sample grids
(:class:`SampledObservation`) or from closed-form signal terms plus noise
drawn in a band-limited frequency representation (:class:`NoiseWindow`).

Batch helpers (``*_batch``) take a leading trial axis and are what the Monte
Carlo engine calls; the scalar API wraps them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateReferenceError, DskError, InvalidArgumentError
from .geometry import TdoaFingerprint
from .waveform import SampleGrid, SincPulse, cross_correlate

TWO_PI = 2.0 * math.pi


class ConsistencyError(DskError, RuntimeError):
    """Observation and reference disagree on shape or content."""


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Zero-based pairs ``(i, j)`` with ``j < i`` and their ``1/i`` weights."""
    i, j = np.nonzero(np.tril(np.ones((n, n), dtype=bool), -1))
    return i, j, 1.0 / i


def _frac_phase(x: np.ndarray) -> np.ndarray:
    # exp(-j 2 pi x) evaluated on the fractional part for accuracy at large x
    return np.exp(-1j * TWO_PI * np.fmod(x, 1.0))


def reference_arrays(delays: np.ndarray, f_c: float) -> tuple[np.ndarray, np.ndarray]:
    """Candidate shifts and weights from per-candidate delay vectors.

    ``delays`` has shape ``(..., M, N)``; returns shifts and weights of shape
    ``(..., M, P)`` in :func:`pair_indices` order.
    """
    n = delays.shape[-1]
    i, j, _ = pair_indices(n)
    shifts = delays[..., i] - delays[..., j]
    # f_c * (tau_i - tau_j) computed as a difference of carrier cycles
    cycles = f_c * delays
    weights = _frac_phase(cycles[..., i] - cycles[..., j])
    return shifts, weights


@dataclass(frozen=True)
class DskReference:
    fingerprints: tuple[TdoaFingerprint, ...]
    carrier: float
    shifts: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        fps = tuple(self.fingerprints)
        if len(fps) < 1:
            raise InvalidArgumentError("a reference needs at least one fingerprint")
        n = fps[0].n_elements
        if any(f.n_elements != n for f in fps):
            raise InvalidArgumentError("fingerprints disagree on the antenna count")
        delays = np.stack([f.relative_delays for f in fps])
        shifts, weights = reference_arrays(delays, self.carrier)
        shifts.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "fingerprints", fps)
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "weights", weights)

    @property
    def n_candidates(self) -> int:
        return len(self.fingerprints)

    @property
    def n_antennas(self) -> int:
        return self.fingerprints[0].n_elements

    @property
    def pair_scale(self) -> np.ndarray:
        return pair_indices(self.n_antennas)[2]


@dataclass(frozen=True)
class CsiReference:
    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or not np.all(np.isfinite(v)):
            raise InvalidArgumentError("CSI reference must be a finite (M, N) array")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)


@dataclass(frozen=True)
class PhaseFeature:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SampledObservation:
    grids: tuple[SampleGrid, ...]

    def __post_init__(self):
        g = tuple(self.grids)
        if len(g) < 2 or any(x.spec != g[0].spec for x in g):
            raise ConsistencyError("need >= 2 grids sharing one layout")
        object.__setattr__(self, "grids", g)

    @property
    def n_antennas(self) -> int:
        return len(self.grids)

    def correlations(self, ref: DskReference) -> np.ndarray:
        i, j, _ = pair_indices(self.n_antennas)
        out = np.empty(ref.shifts.shape, dtype=complex)
        for m in range(ref.n_candidates):
            for p in range(len(i)):
                out[m, p] = cross_correlate(self.grids[j[p]], self.grids[i[p]], ref.shifts[m, p])
        return out


@dataclass(frozen=True)
class CorrelationObservation:
    """Pair correlations already evaluated at every candidate's shifts, shape (M, P)."""

    values: np.ndarray
    n_antennas: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", v)

    def correlations(self, ref: DskReference) -> np.ndarray:
        if self.n_antennas != ref.n_antennas or self.values.shape != ref.shifts.shape:
            raise ConsistencyError(
                f"observation has shape {self.values.shape}, reference expects {ref.shifts.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ConsistencyError("missing pair correlation (non-finite entry)")
        return self.values


Observation = SampledObservation | CorrelationObservation


@dataclass(frozen=True)
class NoiseWindow:
    """Band-limited periodic representation of the receive window.

    The window holds ``n_bins`` Nyquist samples, i.e. spans ``P = n_bins*T``.
    Signals and noise are represented by their ``n_bins`` in-band Fourier
    coefficients, which makes correlations at arbitrary shifts consistent with
    one noise realisation per antenna.
    """

    pulse: SincPulse
    n_bins: int = 16

    def __post_init__(self):
        if self.n_bins < 1:
            raise InvalidArgumentError("need at least one frequency bin")

    @property
    def span(self) -> float:
        return self.n_bins * self.pulse.period

    def freqs(self) -> np.ndarray:
        return (np.arange(self.n_bins) - (self.n_bins - 1) / 2.0) / self.span

    def pulse_bins(self, delays: np.ndarray) -> np.ndarray:
        """Fourier coefficients of ``s(t - tau)``; shape ``delays.shape + (L,)``."""
        f = self.freqs()
        scale = self.pulse.period / self.span
        return scale * np.exp(-1j * TWO_PI * np.asarray(delays)[..., None] * f)

    def noise_bins(self, sigma2: float, shape, rng: np.random.Generator) -> np.ndarray:
        """White noise of PSD ``sigma2`` projected on the bins; shape ``shape + (L,)``."""
        z = rng.standard_normal((*shape, self.n_bins, 2))
        return math.sqrt(sigma2 / self.span / 2.0) * (z[..., 0] + 1j * z[..., 1])


def analytic_correlations_batch(window: NoiseWindow, alpha: np.ndarray, delays: np.ndarray,
                                noise: np.ndarray | None, shifts: np.ndarray) -> np.ndarray:
    """Pair correlations for a batch of trials.

    alpha, delays: ``(T, N)`` complex gains and envelope delays of the
    received copies. noise: ``(T, N, L)`` noise bins or ``None``. shifts:
    ``(T, M, P)`` candidate shifts. Returns ``(T, M, P)``.

    The signal-by-signal part uses the exact kernel; the noise-bearing parts
    use the bin representation.
    """
    n = alpha.shape[-1]
    i, j, _ = pair_indices(n)
    pulse = window.pulse
    aa = alpha[:, j] * np.conj(alpha[:, i])
    lag = shifts + (delays[:, j] - delays[:, i])[:, None, :]
    out = aa[:, None, :] * pulse.period * np.sinc(pulse.bandwidth * lag)
    if noise is None:
        return out
    s = alpha[..., None] * window.pulse_bins(delays)
    r = s + noise
    cross = r[:, j, :] * np.conj(r[:, i, :]) - s[:, j, :] * np.conj(s[:, i, :])
    phase = np.exp(-1j * TWO_PI * shifts[..., None] * window.freqs())
    out = out + window.span * np.einsum("tmpk,tpk->tmp", phase, cross)
    return out


def matched_filter_batch(window: NoiseWindow, alpha: np.ndarray, delays: np.ndarray,
                         noise: np.ndarray | None) -> np.ndarray:
    """Per-antenna matched-filter outputs at nominal timing, normalised by E_s."""
    pulse = window.pulse
    y = alpha * np.sinc(pulse.bandwidth * delays)
    if noise is not None:
        y = y + noise.sum(axis=-1)
    return y


def analytic_observation(window: NoiseWindow, ref: DskReference, alpha, delays,
                         noise=None) -> CorrelationObservation:
    alpha = np.asarray(alpha, dtype=complex)[None]
    delays = np.asarray(delays, dtype=float)[None]
    nz = None if noise is None else np.asarray(noise)[None]
    vals = analytic_correlations_batch(window, alpha, delays, nz, ref.shifts[None])[0]
    return CorrelationObservation(vals, alpha.shape[-1])


def dsk_statistics_batch(corr: np.ndarray, weights: np.ndarray, scale: np.ndarray) -> np.ndarray:
    """``(T, M, P)`` correlations and weights to ``(T, M)`` statistics."""
    return np.real(weights * corr) @ scale


def dsk_magnitudes_batch(corr: np.ndarray, scale: np.ndarray) -> np.ndarray:
    return np.abs(corr) @ scale


def dsk_statistics(obs: Observation, ref: DskReference) -> np.ndarray:
    corr = obs.correlations(ref)
    return dsk_statistics_batch(corr[None], ref.weights[None], ref.pair_scale)[0]


def dsk_statistic(obs: Observation, ref: DskReference, m: int) -> float:
    if not 0 <= m < ref.n_candidates:
        raise InvalidArgumentError(f"candidate index {m} out of range")
    return float(dsk_statistics(obs, ref)[m])


def dsk_pair_terms(obs: Observation, ref: DskReference, m: int) -> np.ndarray:
    """Unscaled per-pair terms ``Re{w C}`` for candidate ``m``."""
    corr = obs.correlations(ref)
    return np.real(ref.weights[m] * corr[m])


def dsk_detect(obs: Observation, ref: DskReference) -> int:
    if ref.n_candidates < 2:
        raise InvalidArgumentError("detection needs M >= 2")
    return int(np.argmax(dsk_statistics(obs, ref)))


def dsk_statistic_magnitude(obs: Observation, ref: DskReference, m: int) -> float:
    corr = obs.correlations(ref)
    return float(np.abs(corr[m]) @ ref.pair_scale)


def dsk_detect_magnitude(obs: Observation, ref: DskReference) -> int:
    corr = obs.correlations(ref)
    return int(np.argmax(np.abs(corr) @ ref.pair_scale))


def _pilot_array(pilot_obs, n_p: int | None) -> np.ndarray:
    p = np.asarray(pilot_obs, dtype=complex)
    if p.ndim == 1:
        p = p[None]
    if p.shape[0] == 0:
        raise InvalidArgumentError("empty pilot set")
    if n_p is not None:
        if n_p < 1:
            raise InvalidArgumentError("N_p must be >= 1")
        if p.shape[0] < n_p:
            raise InvalidArgumentError(f"expected {n_p} pilots, got {p.shape[0]}")
        p = p[:n_p]
    return p


def estimate_csi_reference(pilot_obs, n_p: int | None = None) -> np.ndarray:
    """Entrywise mean of the pilot vectors (one CSI entry)."""
    return _pilot_array(pilot_obs, n_p).mean(axis=0)


def phase_feature_batch(h: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Phase features of ``(..., N)`` vectors and a mask of degenerate rows."""
    h = np.asarray(h, dtype=complex)
    norm = np.linalg.norm(h, axis=-1)
    h1 = h[..., :1]
    bad = (np.abs(h1[..., 0]) <= tol * norm) | (norm == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = h[..., 1:] / h1
        tail = ratio / np.abs(ratio)
    tail = tail / math.sqrt(h.shape[-1] - 1)
    tail = np.where(bad[..., None], 0.0, tail)
    return tail, bad


def phase_feature(h) -> PhaseFeature:
    tail, bad = phase_feature_batch(np.asarray(h)[None])
    if bad[0]:
        raise DegenerateReferenceError("first antenna entry is numerically zero")
    return PhaseFeature(tail[0])


def estimate_phase_feature(pilot_obs, n_p: int | None = None) -> PhaseFeature:
    return phase_feature(estimate_csi_reference(pilot_obs, n_p))


def ssk_decide_batch(y: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Minimum-distance decisions; ``y`` is ``(T, N)``, ``h`` is ``(T, M, N)`` or ``(M, N)``."""
    d2 = np.sum(np.abs(y[:, None, :] - h) ** 2, axis=-1)
    return np.argmin(d2, axis=-1)


def ssk_detect(obs_vector, ref: CsiReference) -> int:
    y = np.asarray(obs_vector, dtype=complex)
    if y.shape != ref.vectors.shape[1:]:
        raise InvalidArgumentError("observation length does not match the references")
    return int(ssk_decide_batch(y[None], ref.vectors)[0])


class FeatureDecision(NamedTuple):
    index: int
    erasure: bool


def feature_decide_batch(y: np.ndarray, features: np.ndarray,
                         rng: np.random.Generator | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Decisions ``argmax_m |<f(y), f_m>|`` for ``(T, N)`` observations.

    ``features`` is ``(M, N-1)`` or ``(T, M, N-1)``. Degenerate observations
    get a uniformly random decision and are flagged in the returned mask.
    """
    fy, bad = phase_feature_batch(y)
    if features.ndim == 2:
        score = np.abs(np.conj(fy) @ features.T)
    else:
        score = np.abs(np.einsum("tk,tmk->tm", np.conj(fy), features))
    dec = np.argmax(score, axis=-1)
    if np.any(bad):
        if rng is None:
            raise DegenerateReferenceError("degenerate observation and no RNG for the erasure draw")
        m = features.shape[-2]
        dec = np.where(bad, rng.integers(0, m, size=dec.shape), dec)
    return dec, bad


def dsk_detect_feature(obs_vector, features: Sequence[PhaseFeature],
                       rng: np.random.Generator | None = None) -> FeatureDecision:
    f = np.stack([x.values for x in features])
    dec, bad = feature_decide_batch(np.asarray(obs_vector, dtype=complex)[None], f, rng)
    return FeatureDecision(int(dec[0]), bool(bad[0]))
