"""INI experiment configuration: parsing with diagnostics, serialisation, hashing.

Layout::

    [experiment]
    kind = circular        ; circular | rsu | coherence
    seed = 0
    trials = 10000         ; trials per point (circular) or drives per point (rsu)
    workers = 1
    out = results

    [sweep]
    variable = snr_db
    grid = 0, 4, 8, 12

    [circular]  / [rsu] / [coherence]
    <field> = <value>

Every key has a default, so an empty file is a valid configuration.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from ..errors import ConfigError, DskError
from ..geometry import C_LIGHT
from ..scenarios.cell import SWEEPABLE as CELL_SWEEPABLE
from ..scenarios.cell import CircularCellConfig
from ..scenarios.engine import Sweep
from ..scenarios.rsu import SWEEPABLE as RSU_SWEEPABLE
from ..scenarios.rsu import RsuConfig

KINDS = ("circular", "rsu", "coherence")


@dataclass(frozen=True)
class CoherenceSettings:
    """Parameters for the coherence-curve evaluation (one symmetric antenna pair)."""

    v: float = 30.0 / 3.6
    d: float = 100.0
    f_c: float = 30e9
    B: float = 100e6
    l: float = 0.1
    theta: float = math.pi / 4
    phi1: float = 0.0
    phi2: float = math.pi
    df: float = 0.0
    df_prime: float = 0.0
    c: float = C_LIGHT

    def __post_init__(self):
        if min(self.v, self.d, self.f_c, self.B, self.l, self.c) <= 0:
            raise ConfigError("coherence parameters v, d, f_c, B, l and c must be positive")

    @property
    def t_regime(self) -> float:
        """Largest displacement time accepted by the one-dimensional direction-coherence integral."""
        return self.d / (math.sqrt(2.0) * self.v)

    def default_grid(self, points: int = 61) -> tuple[float, ...]:
        hi = 0.999 * self.t_regime
        return tuple(float(x) for x in np.geomspace(1e-6, hi, points))


DEFAULT_SWEEPS = {
    "circular": Sweep("snr_db", tuple(float(x) for x in range(0, 18, 2))),
    "rsu": Sweep("T_upd", (1e-5,)),
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "circular"
    seed: int = 0
    trials: int = 10000
    workers: int = 1
    out: str = "results"
    sweep: Sweep | None = None
    circular: CircularCellConfig = field(default_factory=CircularCellConfig)
    rsu: RsuConfig = field(default_factory=RsuConfig)
    coherence: CoherenceSettings = field(default_factory=CoherenceSettings)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got '{self.kind}'")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.workers < 0:
            raise ConfigError("workers must be >= 0")
        if self.sweep is not None:
            allowed = {"circular": CELL_SWEEPABLE, "rsu": RSU_SWEEPABLE,
                       "coherence": ("t_c",)}[self.kind]
            if self.sweep.variable not in allowed:
                raise ConfigError(f"cannot sweep '{self.sweep.variable}' for kind "
                                  f"'{self.kind}'; choose from {', '.join(allowed)}")

    def effective_sweep(self) -> Sweep:
        if self.sweep is not None:
            return self.sweep
        if self.kind == "coherence":
            return Sweep("t_c", self.coherence.default_grid())
        if self.kind == "rsu":
            return Sweep("T_upd", (self.rsu.T_upd,))
        return DEFAULT_SWEEPS[self.kind]


_EXPERIMENT_KEYS = {"kind": str, "seed": int, "trials": int, "workers": int, "out": str}
_SECTIONS = {"circular": CircularCellConfig, "rsu": RsuConfig, "coherence": CoherenceSettings}


def _field_types(cls) -> dict[str, type]:
    out = {}
    for f in fields(cls):
        out[f.name] = int if f.type in ("int", int) else float
    return out


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    """Line number of every ``key = value`` entry, keyed by (section, key)."""
    lines: dict[tuple[str, str], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            lines.setdefault((section, ""), no)
            continue
        m = re.match(r"([^=:\s]+)\s*[=:]", s)
        if m and section is not None:
            lines[(section, m.group(1).strip())] = no
    return lines


def _convert(raw: str, typ: type, where: str):
    try:
        if typ is int:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        if typ is float:
            return float(raw)
        return raw.strip()
    except ValueError:
        raise ConfigError(f"{where}: cannot read '{raw}' as {typ.__name__}") from None


def _parse_grid(raw: str, where: str) -> tuple[float, ...]:
    raw = raw.strip()
    m = re.fullmatch(r"(linspace|logspace|geomspace)\(([^)]*)\)", raw)
    try:
        if m:
            args = [float(a) for a in m.group(2).split(",")]
            if len(args) != 3:
                raise ValueError
            fn = getattr(np, m.group(1))
            return tuple(float(x) for x in fn(args[0], args[1], int(args[2])))
        return tuple(float(x) for x in raw.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"{where}: cannot read sweep grid '{raw}'") from None


def parse_config_text(text: str, overrides: Mapping[str, Any] | None = None,
                      source: str = "<config>") -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: malformed configuration: {exc}") from None
    lines = _key_lines(text)

    def where(section: str, key: str = "") -> str:
        no = lines.get((section, key))
        loc = f"{source}:{no}" if no else source
        return f"{loc} [{section}]" + (f" {key}" if key else "")

    values: dict[str, dict[str, str]] = {s: dict(parser.items(s)) for s in parser.sections()}
    for key, val in (overrides or {}).items():
        section, _, name = key.rpartition(".")
        if not section:
            section = "experiment"
        values.setdefault(section, {})[name] = str(val)

    known = {"experiment", "sweep", *_SECTIONS}
    for section in values:
        if section not in known:
            raise ConfigError(f"{where(section)}: unknown section '{section}'; "
                              f"expected one of {', '.join(sorted(known))}")

    exp = {}
    for key, raw in values.get("experiment", {}).items():
        if key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"{where('experiment', key)}: unknown key '{key}'")
        exp[key] = _convert(raw, _EXPERIMENT_KEYS[key], where("experiment", key))

    sweep = None
    sw = values.get("sweep", {})
    for key in sw:
        if key not in ("variable", "grid"):
            raise ConfigError(f"{where('sweep', key)}: unknown key '{key}'")
    if sw:
        if "variable" not in sw or "grid" not in sw:
            raise ConfigError(f"{where('sweep')}: a sweep needs both 'variable' and 'grid'")
        try:
            sweep = Sweep(sw["variable"].strip(), _parse_grid(sw["grid"], where("sweep", "grid")))
        except ConfigError as exc:
            raise ConfigError(f"{where('sweep', 'grid')}: {exc}") from None

    sections = {}
    for name, cls in _SECTIONS.items():
        types = _field_types(cls)
        kw = {}
        for key, raw in values.get(name, {}).items():
            if key not in types:
                raise ConfigError(f"{where(name, key)}: unknown key '{key}'; "
                                  f"valid keys: {', '.join(types)}")
            kw[key] = _convert(raw, types[key], where(name, key))
        try:
            sections[name] = cls(**kw)
        except DskError as exc:
            bad = next(iter(kw), "")
            raise ConfigError(f"{where(name, 'M' if 'M' in kw else bad)}: {exc}") from None
    try:
        return ExperimentConfig(sweep=sweep, **exp, **sections)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def parse_config(path: str | Path | None = None,
                 overrides: Mapping[str, Any] | None = None) -> ExperimentConfig:
    """Read ``path`` (or nothing) and apply ``section.key -> value`` overrides."""
    if path is None:
        return parse_config_text("", overrides)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file '{p}' does not exist")
    return parse_config_text(p.read_text(), overrides, source=str(p))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


_RUNTIME_ONLY = ("workers", "out")


def serialize(cfg: ExperimentConfig, *, runtime: bool = True) -> str:
    """INI text that :func:`parse_config_text` reads back to an equal config.

    ``runtime=False`` drops keys that cannot affect results (worker count,
    output directory); that form feeds :func:`config_hash`.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["experiment"] = {k: _fmt(getattr(cfg, k)) for k in _EXPERIMENT_KEYS
                        if runtime or k not in _RUNTIME_ONLY}
    if cfg.sweep is not None:
        cp["sweep"] = {"variable": cfg.sweep.variable,
                       "grid": ", ".join(repr(x) for x in cfg.sweep.grid)}
    for name in _SECTIONS:
        sub = getattr(cfg, name)
        cp[name] = {f.name: _fmt(getattr(sub, f.name)) for f in fields(sub)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def config_hash(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize(cfg, runtime=False).encode()).hexdigest()[:16]

