"""Named experiments and the runners shared by the CLI subcommands."""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..coherence import CoherenceQuery, j_cct, j_dct_exact, j_dct_lower_bound
from ..errors import ConfigError
from ..scenarios.cell import run_cell_sweep
from ..scenarios.engine import SerCurve, Sweep, run_units
from ..scenarios.rsu import run_rsu_sweep, update_interval_for
from .config import CoherenceSettings, ExperimentConfig, config_hash, serialize
from .output import SER_COLUMNS, fmt_float, render_csv, render_meta, ser_rows, write_text

TABLE_OVERHEADS = (0.44, 0.19, 0.0642, 0.02, 0.005, 0.0018, 0.0007, 0.0002)
COHERENCE_COLUMNS = ("t_c", "j_cct", "j_dct_exact", "j_dct_bound")


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str
    sweep: Sweep | None
    series: tuple[dict, ...] = ({},)
    base: dict = field(default_factory=dict)
    trials: int = 10000
    notes: tuple[str, ...] = ()


def _table_grid(t_s: float = 1e-6) -> tuple[float, ...]:
    return tuple(update_interval_for(r) * t_s for r in TABLE_OVERHEADS)


def _logs(a: float, b: float, n: int) -> tuple[float, ...]:
    return tuple(float(x) for x in np.logspace(a, b, n))


PRESETS: dict[str, Preset] = {p.name: p for p in (
    Preset("fig-ser-snr", "circular", Sweep("snr_db", tuple(float(x) for x in range(-4, 18, 2))),
           series=({"M": 4}, {"M": 16}), base={"t_c": 0.0, "sigma_df": 0.0}),
    Preset("fig-ser-tc", "circular", Sweep("t_c", _logs(-6, 0, 13)),
           series=({"speed": 5.0}, {"speed": 10.0}, {"speed": 30.0}),
           base={"M": 4, "snr_db": 14.0, "sigma_df": 0.0}),
    Preset("fig-phase-noise", "circular", Sweep("sigma_df", _logs(0, 5, 6)),
           series=({"snr_db": 10.0}, {"snr_db": 12.0}, {"snr_db": 14.0}),
           base={"M": 4, "t_c": 1e-5},
           notes=("frequency offset drawn per trial as N(0, sigma_df^2); rotation -2*pi*df*t_c",)),
    Preset("rsu-tupd", "rsu", Sweep("T_upd", _table_grid()),
           series=({"p_tx_dbm": 5.0}, {"p_tx_dbm": 10.0}, {"p_tx_dbm": 12.0}), trials=32,
           notes=("trials = drives per point", "vehicle speed 30 m/s unless overridden")),
    Preset("rsu-distance", "rsu", Sweep("rsu_spacing", (50.0, 100.0, 150.0, 200.0, 300.0)),
           series=({"T_upd": 1e-5}, {"T_upd": 1e-4}, {"T_upd": 1e-3}), base={"p_tx_dbm": 12.0},
           trials=32, notes=("trials = drives per point", "vehicle speed 30 m/s unless overridden")),
    Preset("rsu-phasenoise", "rsu", Sweep("sigma_df", _logs(0, 5, 6)),
           series=({"T_upd": 1e-5}, {"T_upd": 1e-4}, {"T_upd": 1e-3}), base={"p_tx_dbm": 12.0},
           trials=32, notes=("trials = drives per point", "vehicle speed 30 m/s unless overridden")),
    Preset("coherence-curves", "coherence", None, trials=1),
)}


def _label(series: dict) -> str:
    return ",".join(f"{k}={v:g}" for k, v in series.items())


def run_ser(cfg: ExperimentConfig, sweep: Sweep, series: tuple[dict, ...] = ({},),
            base: dict | None = None) -> tuple[list[SerCurve], list[list[str]]]:
    """Run every series of a circular or RSU sweep; returns curves and CSV rows."""
    h = config_hash(cfg)
    curves, rows = [], []
    for s in series:
        over = {**(base or {}), **s}
        if cfg.kind == "circular":
            scn = replace(cfg.circular, **over)
            curve = run_cell_sweep(scn, sweep, cfg.trials, cfg.seed, cfg.workers)
        elif cfg.kind == "rsu":
            scn = replace(cfg.rsu, **over)
            curve = run_rsu_sweep(scn, sweep, cfg.trials, cfg.seed, cfg.workers)
        else:
            raise ConfigError(f"kind '{cfg.kind}' has no SER sweep")
        curves.append(curve)
        rows.extend(ser_rows(curve, h, _label(s) if len(series) > 1 else ""))
    return curves, rows


def _coherence_chunk(settings: CoherenceSettings, grid: tuple[float, ...]) -> list[list[str]]:
    base = CoherenceQuery.from_carrier(settings.f_c, c=settings.c, v=settings.v, d=settings.d,
                                       B=settings.B, l1=settings.l, l2=settings.l,
                                       phi1=settings.phi1, phi2=settings.phi2,
                                       theta=settings.theta, df=settings.df,
                                       df_prime=settings.df_prime)
    rows = []
    for t in grid:
        q = base.at(t)
        rows.append([fmt_float(t), fmt_float(j_cct(q)), fmt_float(j_dct_exact(q)),
                     fmt_float(j_dct_lower_bound(q))])
    return rows


def coherence_rows(settings: CoherenceSettings, grid: tuple[float, ...],
                   workers: int | None = 1, chunk: int = 8) -> list[list[str]]:
    if max(grid) >= settings.t_regime or min(grid) < 0:
        raise ConfigError(f"coherence grid must lie in [0, {settings.t_regime:.6g}) s "
                          "(small-angle regime of the direction-coherence integral)")
    parts = [(settings, tuple(grid[k:k + chunk])) for k in range(0, len(grid), chunk)]
    out: list[list[str]] = []
    for rows in run_units(_coherence_chunk, parts, workers):
        out.extend(rows)
    return out


@dataclass(frozen=True)
class RunOutput:
    csv_path: Path
    meta_path: Path
    rows: list[list[str]]
    header: tuple[str, ...]
    curves: list[SerCurve]


def run_experiment(cfg: ExperimentConfig, name: str, *, series: tuple[dict, ...] = ({},),
                   base: dict | None = None, notes: tuple[str, ...] = ()) -> RunOutput:
    """Execute ``cfg`` and write ``<out>/<name>.csv`` plus ``<name>.meta``."""
    t0 = time.perf_counter()
    sweep = cfg.effective_sweep()
    curves: list[SerCurve] = []
    if cfg.kind == "coherence":
        header = COHERENCE_COLUMNS
        rows = coherence_rows(cfg.coherence, sweep.grid, cfg.workers)
    else:
        header = (sweep.variable, *SER_COLUMNS)
        curves, rows = run_ser(cfg, sweep, series, base)
    wall = time.perf_counter() - t0
    out = Path(cfg.out)
    csv_path = write_text(out / f"{name}.csv", render_csv(header, rows))
    series_notes = tuple(f"series {_label(s)}" for s in series if s)
    base_notes = (f"overrides {_label(base)}",) if base else ()
    meta = render_meta(serialize(cfg), name=name, seed=cfg.seed, config_hash=config_hash(cfg),
                       wall_time=wall, notes=notes + base_notes + series_notes)
    meta_path = write_text(out / f"{name}.meta", meta)
    return RunOutput(csv_path, meta_path, rows, header, curves)


def run_preset(name: str, cfg: ExperimentConfig, trials: int | None = None) -> RunOutput:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'; valid names: {', '.join(PRESETS)}")
    p = PRESETS[name]
    sweep = p.sweep
    if p.kind == "coherence":
        sweep = Sweep("t_c", cfg.coherence.default_grid())
    eff = replace(cfg, kind=p.kind, sweep=sweep, trials=trials or p.trials)
    return run_experiment(eff, name, series=p.series, base=p.base, notes=p.notes)

