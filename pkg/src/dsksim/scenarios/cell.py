"""Circular-cell downlink: M BS antennas on the cell edge, an N-element MD array inside.

Per trial the MD is placed uniformly in the disk, references (DSK
fingerprints and SSK channel vectors) are taken at that placement, and the
MD then moves ``t_c*speed`` along a random heading before the data symbol
arrives. A constant frequency offset ``df ~ N(0, sigma_df^2)`` rotates the
whole received signal by ``-2*pi*df*t_c``.

Symbol timing follows the active transmitter's arrival at the array
center; envelope delays are relative to it, carrier phases use absolute
delays.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from ..detection import (NoiseWindow, analytic_correlations_batch, dsk_magnitudes_batch,
                         dsk_statistics_batch, matched_filter_batch, pair_indices,
                         reference_arrays, ssk_decide_batch)
from ..errors import ConfigError, InvalidArgumentError
from ..geometry import C_LIGHT, MdArray, Point2D, circular_array
from ..waveform import SincPulse
from .engine import SerCurve, SerPoint, Sweep, blocks, run_units, stream

TWO_PI = 2.0 * math.pi
BLOCK = 500


def is_power_of_two(m: int) -> bool:
    return int(m) == m and m >= 2 and (int(m) & (int(m) - 1)) == 0


@dataclass(frozen=True)
class CircularCellConfig:
    cell_radius: float = 100.0
    M: int = 4
    N: int = 7
    array_radius: float = 0.1
    f_c: float = 30e9
    B: float = 100e6
    speed: float = 30.0 / 3.6
    snr_db: float = 14.0
    t_c: float = 0.0
    sigma_df: float = 0.0
    rho: float = 1.0
    window_bins: int = 16
    min_distance: float = 1.0
    c: float = C_LIGHT

    def __post_init__(self):
        if not is_power_of_two(self.M):
            raise InvalidArgumentError(f"M = {self.M} is not a power of two")
        if self.N < 2:
            raise InvalidArgumentError("N must be >= 2")
        if self.t_c < 0 or self.speed < 0 or self.sigma_df < 0:
            raise InvalidArgumentError("t_c, speed and sigma_df must be >= 0")
        if self.min_distance >= self.cell_radius:
            raise InvalidArgumentError("exclusion radius must be smaller than the cell")
        if self.window_bins < 1:
            raise InvalidArgumentError("window_bins must be >= 1")

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_psd(self) -> float:
        """sigma^2 such that rho^2*E_s/sigma^2 equals the per-antenna SNR."""
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return self.rho**2 * (1.0 / self.B) / self.snr_linear


SWEEPABLE = ("snr_db", "t_c", "sigma_df", "speed", "M", "N", "array_radius", "B", "cell_radius")


@dataclass(frozen=True)
class CircularCell:
    cfg: CircularCellConfig
    transmitters: tuple[Point2D, ...]
    element_offsets: np.ndarray

    kind = "circular"

    def array_at(self, center: Point2D) -> MdArray:
        return circular_array(center, self.cfg.N, self.cfg.array_radius)

    def sample_md(self, rng: np.random.Generator) -> complex:
        """Uniform position in the disk, at least ``min_distance`` from every BS antenna."""
        cfg = self.cfg
        tx = np.array([p.as_complex() for p in self.transmitters])
        while True:
            r = cfg.cell_radius * math.sqrt(rng.uniform())
            a = rng.uniform(0.0, TWO_PI)
            z = r * complex(math.cos(a), math.sin(a))
            if np.min(np.abs(tx - z)) >= cfg.min_distance:
                return z


def build_circular_cell(cfg: CircularCellConfig = CircularCellConfig()) -> CircularCell:
    if not is_power_of_two(cfg.M):
        raise InvalidArgumentError(f"M = {cfg.M} is not a power of two")
    tx = tuple(Point2D.polar(cfg.cell_radius, TWO_PI * m / cfg.M) for m in range(cfg.M))
    offs = circular_array(Point2D(0.0, 0.0), cfg.N, cfg.array_radius).offsets()
    offs.setflags(write=False)
    return CircularCell(cfg, tx, offs)


@dataclass(frozen=True)
class TrialDraws:
    center: np.ndarray
    tx: np.ndarray
    heading: np.ndarray
    df_unit: np.ndarray
    noise_unit: np.ndarray


def draw_trials(cell: CircularCell, seed: int, point: int, start: int, stop: int) -> TrialDraws:
    """Random inputs for trials ``start..stop-1``, one stream per trial."""
    cfg = cell.cfg
    n = stop - start
    center = np.empty(n, dtype=complex)
    tx = np.empty(n, dtype=np.int64)
    heading = np.empty(n)
    df = np.empty(n)
    noise = np.empty((n, cfg.N, cfg.window_bins, 2))
    for k in range(n):
        g = stream(seed, point, start + k)
        center[k] = cell.sample_md(g)
        tx[k] = g.integers(cfg.M)
        heading[k] = g.uniform(0.0, TWO_PI)
        df[k] = g.standard_normal()
        noise[k] = g.standard_normal((cfg.N, cfg.window_bins, 2))
    return TrialDraws(center, tx, heading, df, noise)


@dataclass(frozen=True)
class TrialOutcome:
    truth: np.ndarray
    dsk: np.ndarray
    ssk: np.ndarray
    dsk_stats: np.ndarray
    dsk_magnitude: np.ndarray


def simulate_trials(cell: CircularCell, draws: TrialDraws, *,
                    common_phase: np.ndarray | None = None) -> TrialOutcome:
    """Vectorised DSK and SSK decisions for a batch of drawn trials.

    ``common_phase`` optionally adds a per-trial rotation applied to the whole
    received signal on top of the frequency-offset rotation.
    """
    cfg = cell.cfg
    pulse = SincPulse(cfg.B)
    window = NoiseWindow(pulse, cfg.window_bins)
    tx = np.array([p.as_complex() for p in cell.transmitters])
    e = cell.element_offsets

    # references at the initial placement
    ref_pos = draws.center[:, None] + e[None, :]
    tau_ref = np.abs(tx[None, :, None] - ref_pos[:, None, :]) / cfg.c
    shifts, weights = reference_arrays(tau_ref, cfg.f_c)
    h_ref = cfg.rho * np.exp(-1j * TWO_PI * np.fmod(cfg.f_c * tau_ref, 1.0))

    # channel after the displacement
    moved = draws.center + cfg.t_c * cfg.speed * np.exp(1j * draws.heading)
    b = tx[draws.tx]
    tau = np.abs(b[:, None] - (moved[:, None] + e[None, :])) / cfg.c
    tau0 = np.abs(b - moved) / cfg.c
    psi = -TWO_PI * (cfg.sigma_df * draws.df_unit) * cfg.t_c
    if common_phase is not None:
        psi = psi + common_phase
    rot = np.exp(1j * psi)
    alpha = cfg.rho * np.exp(-1j * TWO_PI * np.fmod(cfg.f_c * tau, 1.0)) * rot[:, None]
    delays = tau - tau0[:, None]
    sigma2 = cfg.noise_psd
    if sigma2 > 0:
        scale = math.sqrt(sigma2 / window.span / 2.0)
        noise = scale * (draws.noise_unit[..., 0] + 1j * draws.noise_unit[..., 1])
        noise = noise * rot[:, None, None]
    else:
        noise = None

    corr = analytic_correlations_batch(window, alpha, delays, noise, shifts)
    scale = pair_indices(cfg.N)[2]
    stats = dsk_statistics_batch(corr, weights, scale)
    dsk = np.argmax(stats, axis=-1)
    mag = np.argmax(dsk_magnitudes_batch(corr, scale), axis=-1)
    y = matched_filter_batch(window, alpha, delays, noise)
    ssk = ssk_decide_batch(y, h_ref)
    return TrialOutcome(draws.tx, dsk, ssk, stats, mag)


def _cell_unit(cfg: CircularCellConfig, seed: int, point: int, start: int, stop: int):
    cell = build_circular_cell(cfg)
    out = simulate_trials(cell, draw_trials(cell, seed, point, start, stop))
    return (stop - start, int(np.sum(out.dsk != out.truth)), int(np.sum(out.ssk != out.truth)))


def point_configs(cfg, sweep: Sweep, allowed: tuple[str, ...]) -> list:
    if sweep.variable not in allowed:
        raise ConfigError(f"cannot sweep '{sweep.variable}'; choose from {', '.join(allowed)}")
    ints = {f.name for f in fields(cfg) if f.type in ("int", int)}
    out = []
    for v in sweep.grid:
        val = int(round(v)) if sweep.variable in ints else float(v)
        out.append(replace(cfg, **{sweep.variable: val}))
    return out


def run_cell_sweep(cfg: CircularCellConfig, sweep: Sweep, trials: int, seed: int,
                   workers: int | None = 1, block: int = BLOCK) -> SerCurve:
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    cfgs = point_configs(cfg, sweep, SWEEPABLE)
    units = [(c, seed, p, a, b) for p, c in enumerate(cfgs) for a, b in blocks(trials, block)]
    results = run_units(_cell_unit, units, workers)
    tallies = np.zeros((len(cfgs), 3), dtype=np.int64)
    for u, r in zip(units, results):
        tallies[u[2]] += r
    points = []
    for p, (value, c) in enumerate(zip(sweep.grid, cfgs)):
        n, e_dsk, e_ssk = (int(x) for x in tallies[p])
        points.append(SerPoint(value, "dsk", n, e_dsk, mean_snr_db=c.snr_db))
        points.append(SerPoint(value, "ssk", n, e_ssk, mean_snr_db=c.snr_db))
    return SerCurve(sweep.variable, sweep.grid, tuple(points), seed,
                    {"scenario": "circular", "config": asdict(cfg)})
