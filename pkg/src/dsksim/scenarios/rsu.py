"""Highway RSU downlink with pilot-aided references and Wiener phase noise.

RSUs stand at ``(k*spacing, lateral_offset)`` along a straight road on the
x-axis. While the vehicle is between RSU ``k`` and ``k+1`` the alphabet is
the ``M`` nearest RSUs; with ``M = 2`` that is the bounding pair. At each
segment entry, and then after every ``U`` data symbols, the receiver
collects ``N_p`` pilots per transmitter and refreshes both references:
the averaged pilot vector (SSK) and its phase feature (DSK).

Random inputs use three independent streams per drive (geometry and
symbols, receiver noise, phase noise) so the phase path can be varied with
everything else held fixed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..detection import feature_decide_batch, phase_feature_batch, ssk_decide_batch
from ..errors import InvalidArgumentError
from ..geometry import C_LIGHT
from ..impairments import dbm_to_watts, wiener_increment_std
from .cell import is_power_of_two, point_configs
from .engine import SerCurve, SerPoint, Sweep, run_units, stream

TWO_PI = 2.0 * math.pi


def symbols_per_update(t_upd: float, t_s: float) -> int:
    """``ceil(T_upd/T_s)``, tolerant of round-off in the ratio."""
    r = t_upd / t_s
    return max(1, math.ceil(r - 1e-9 * r))


def overhead_ratio(n_p: int, u: int, n_tx: int = 2) -> float:
    """Pilot share ``n_tx*N_p/(U + n_tx*N_p)`` of one update block."""
    if n_p < 1 or u < 1:
        raise InvalidArgumentError("N_p and U must be >= 1")
    return n_tx * n_p / (u + n_tx * n_p)


def update_interval_for(ratio: float, n_p: int = 4, n_tx: int = 2) -> int:
    """Inverse of :func:`overhead_ratio`, rounded to the nearest integer U."""
    if not 0 < ratio < 1:
        raise InvalidArgumentError("ratio must lie in (0, 1)")
    return max(1, round(n_tx * n_p * (1.0 / ratio - 1.0)))


@dataclass(frozen=True)
class RsuConfig:
    rsu_spacing: float = 100.0
    lateral_offset: float = 10.0
    N: int = 5
    element_spacing: float = 0.5
    array_orientation: float = math.pi / 4
    N_p: int = 4
    T_s: float = 1e-6
    T_upd: float = 1e-5
    p_tx_dbm: float = 12.0
    sigma2: float = 1e-12
    sigma_df: float = 100.0
    vehicle_speed: float = 30.0
    f_c: float = 30e9
    M: int = 2
    c: float = C_LIGHT
    min_drive: float = 0.005
    min_blocks: int = 4

    def __post_init__(self):
        if not is_power_of_two(self.M):
            raise InvalidArgumentError(f"M = {self.M} is not a power of two")
        if self.N < 2 or self.N_p < 1:
            raise InvalidArgumentError("need N >= 2 and N_p >= 1")
        if not (self.T_s > 0 and self.T_upd > 0 and self.rsu_spacing > 0):
            raise InvalidArgumentError("T_s, T_upd and rsu_spacing must be positive")
        if self.sigma2 < 0 or self.sigma_df < 0 or self.vehicle_speed < 0:
            raise InvalidArgumentError("sigma2, sigma_df and vehicle_speed must be >= 0")

    @property
    def U(self) -> int:
        return symbols_per_update(self.T_upd, self.T_s)

    @property
    def p_tx(self) -> float:
        return dbm_to_watts(self.p_tx_dbm)

    @property
    def wavelength(self) -> float:
        return self.c / self.f_c

    @property
    def nominal_overhead(self) -> float:
        return overhead_ratio(self.N_p, self.U, self.M)

    def drive_duration(self) -> float:
        """Default drive length: at least ``min_drive`` and ``min_blocks`` update blocks."""
        block = (self.U + self.M * self.N_p) * self.T_s
        return max(self.min_drive, self.min_blocks * block)


SWEEPABLE = ("T_upd", "rsu_spacing", "sigma_df", "p_tx_dbm", "vehicle_speed",
             "lateral_offset", "array_orientation", "N_p", "sigma2")


@dataclass(frozen=True)
class RsuScenario:
    cfg: RsuConfig
    element_offsets: np.ndarray

    kind = "rsu"

    def rsu_position(self, k):
        return np.asarray(k) * self.cfg.rsu_spacing + 1j * self.cfg.lateral_offset

    def segment(self, x):
        return np.floor(np.asarray(x) / self.cfg.rsu_spacing).astype(np.int64)

    def alphabet(self, x) -> np.ndarray:
        """RSU indices forming the alphabet at road position(s) ``x``, shape ``(..., M)``."""
        seg = self.segment(x)
        return seg[..., None] - self.cfg.M // 2 + 1 + np.arange(self.cfg.M)

    def channel(self, x, rsu_index, theta=0.0) -> np.ndarray:
        """Noise-free N-vectors from RSU ``rsu_index`` to the array centred at ``x``."""
        cfg = self.cfg
        pos = np.asarray(x)[..., None] + self.element_offsets
        d = np.abs(self.rsu_position(np.asarray(rsu_index))[..., None] - pos)
        lam = cfg.wavelength
        amp = math.sqrt(cfg.p_tx) * lam / (4.0 * math.pi * d)
        return amp * np.exp(-1j * TWO_PI * np.fmod(d / lam, 1.0)) * np.exp(1j * np.asarray(theta))[..., None]


def build_rsu(cfg: RsuConfig = RsuConfig()) -> RsuScenario:
    n = np.arange(cfg.N) - (cfg.N - 1) / 2.0
    offs = n * cfg.element_spacing * cfg.wavelength * np.exp(1j * cfg.array_orientation)
    offs.setflags(write=False)
    return RsuScenario(cfg, offs)


@dataclass(frozen=True)
class Schedule:
    kind: np.ndarray   # -1 for data, else transmitter slot of the pilot
    block: np.ndarray  # reference block each symbol belongs to
    n_blocks: int


def build_schedule(seg: np.ndarray, m: int, n_p: int, u: int) -> Schedule:
    """Pilot/data layout: a pilot block at every segment entry and after ``u`` data symbols."""
    n = seg.shape[0]
    kind = np.full(n, -2, dtype=np.int64)
    block = np.full(n, -1, dtype=np.int64)
    change = np.flatnonzero(np.diff(seg)) + 1
    seg_end = np.append(change, n)
    # next segment boundary after each symbol
    nxt = seg_end[np.searchsorted(seg_end, np.arange(n), side="right")]
    pilots = np.repeat(np.arange(m), n_p)
    k = 0
    b = 0
    while k < n:
        end = nxt[k]
        p_end = min(k + m * n_p, n)
        if p_end > end:
            # boundary inside the pilot block: these pilots are wasted
            kind[k:end] = pilots[: end - k]
            k = end
            continue
        kind[k:p_end] = pilots[: p_end - k]
        block[k:p_end] = b
        d_end = min(p_end + u, end)
        kind[p_end:d_end] = -1
        block[p_end:d_end] = b
        k = d_end
        b += 1
    return Schedule(kind, block, b)


@dataclass(frozen=True)
class RsuDriveResult:
    dsk_errors: int
    ssk_errors: int
    data_symbols: int
    pilot_symbols: int
    erasures: int
    snr_sum: float

    @property
    def overhead(self) -> float:
        total = self.data_symbols + self.pilot_symbols
        return self.pilot_symbols / total if total else math.nan

    @property
    def mean_snr_db(self) -> float:
        if self.data_symbols == 0 or self.snr_sum <= 0:
            return math.nan
        return 10.0 * math.log10(self.snr_sum / self.data_symbols)

    def __add__(self, other: "RsuDriveResult") -> "RsuDriveResult":
        return RsuDriveResult(self.dsk_errors + other.dsk_errors, self.ssk_errors + other.ssk_errors,
                              self.data_symbols + other.data_symbols,
                              self.pilot_symbols + other.pilot_symbols,
                              self.erasures + other.erasures, self.snr_sum + other.snr_sum)

    def points(self, value: float) -> tuple[SerPoint, SerPoint]:
        kw = dict(overhead=self.overhead, mean_snr_db=self.mean_snr_db)
        return (SerPoint(value, "dsk", self.data_symbols, self.dsk_errors, erasures=self.erasures, **kw),
                SerPoint(value, "ssk", self.data_symbols, self.ssk_errors, **kw))


def simulate_drive(cfg: RsuConfig, duration: float, seed: int, key: tuple[int, ...] = (),
                   phase_seed: int | None = None, start_x: float | None = None) -> RsuDriveResult:
    if not duration > 0:
        raise InvalidArgumentError("duration must be positive")
    scn = build_rsu(cfg)
    g_geo = stream(seed, *key, 0)
    g_noise = stream(seed, *key, 1)
    g_phase = stream(seed if phase_seed is None else phase_seed, *key, 2)

    n = max(1, int(round(duration / cfg.T_s)))
    x0 = g_geo.uniform(0.0, cfg.rsu_spacing) if start_x is None else float(start_x)
    x = x0 + cfg.vehicle_speed * cfg.T_s * np.arange(n)
    seg = scn.segment(x)
    sched = build_schedule(seg, cfg.M, cfg.N_p, cfg.U)

    slot = g_geo.integers(0, cfg.M, n)
    slot = np.where(sched.kind >= 0, sched.kind, slot)
    theta = np.cumsum(wiener_increment_std(cfg.sigma_df, cfg.T_s) * g_phase.standard_normal(n))
    rsu = scn.alphabet(x)[np.arange(n), slot]
    h = scn.channel(x, rsu, theta)
    w = math.sqrt(cfg.sigma2 / 2.0) * (g_noise.standard_normal((n, cfg.N))
                                       + 1j * g_noise.standard_normal((n, cfg.N)))
    y = h + w

    # references: mean pilot vector per (block, slot)
    pil = (sched.kind >= 0) & (sched.block >= 0)
    ref = np.zeros((sched.n_blocks, cfg.M, cfg.N), dtype=complex)
    np.add.at(ref, (sched.block[pil], sched.kind[pil]), y[pil])
    ref /= cfg.N_p
    feat, _ = phase_feature_batch(ref)

    data = sched.kind == -1
    yd = y[data]
    truth = slot[data]
    b = sched.block[data]
    ssk = ssk_decide_batch(yd, ref[b])
    dsk, erased = feature_decide_batch(yd, feat[b], g_geo)
    snr = np.sum(np.abs(h[data]) ** 2) / cfg.N / cfg.sigma2 if cfg.sigma2 > 0 else math.inf
    return RsuDriveResult(int(np.sum(dsk != truth)), int(np.sum(ssk != truth)), int(data.sum()),
                          int((sched.kind >= 0).sum()), int(erased.sum()), float(snr))


def run_rsu_drive(cfg: RsuConfig, duration: float | None = None, seed: int = 0,
                  phase_seed: int | None = None, start_x: float | None = None) -> SerCurve:
    """One drive; the returned curve has a single grid point at ``T_upd``."""
    res = simulate_drive(cfg, duration or cfg.drive_duration(), seed, (), phase_seed, start_x)
    return SerCurve("T_upd", (cfg.T_upd,), res.points(cfg.T_upd), seed,
                    {"scenario": "rsu", "config": asdict(cfg), "result": res})


def _rsu_unit(cfg: RsuConfig, duration: float | None, seed: int, point: int, drive: int,
              drives: int):
    # stratified start: drive k starts in the k-th of `drives` equal slices of a segment
    jitter = stream(seed, point, drive, 3).uniform()
    x0 = cfg.rsu_spacing * (drive + jitter) / drives
    return simulate_drive(cfg, duration or cfg.drive_duration(), seed, (point, drive), start_x=x0)


def run_rsu_sweep(cfg: RsuConfig, sweep: Sweep, drives: int, seed: int,
                  workers: int | None = 1, duration: float | None = None) -> SerCurve:
    if drives < 1:
        raise InvalidArgumentError("need at least one drive per point")
    cfgs = point_configs(cfg, sweep, SWEEPABLE)
    units = [(c, duration, seed, p, k, drives) for p, c in enumerate(cfgs) for k in range(drives)]
    results = run_units(_rsu_unit, units, workers)
    points = []
    for p, value in enumerate(sweep.grid):
        tot = RsuDriveResult(0, 0, 0, 0, 0, 0.0)
        for u, r in zip(units, results):
            if u[3] == p:
                tot = tot + r
        points.extend(tot.points(value))
    return SerCurve(sweep.variable, sweep.grid, tuple(points), seed,
                    {"scenario": "rsu", "config": asdict(cfg)})
