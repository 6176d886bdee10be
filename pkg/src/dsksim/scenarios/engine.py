"""Deterministic Monte Carlo plumbing: RNG streams, intervals, result curves, workers."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.stats import norm

from ..errors import ConfigError

Z95 = float(norm.ppf(0.975))
WILSON_BELOW = 20


def stream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for the unit identified by ``key``.

    The key is folded into the seed sequence's spawn key, so a stream depends
    only on ``(seed, key)`` and never on evaluation order.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def ser_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """95% interval for an error rate: Wilson below 20 errors, normal otherwise."""
    if trials <= 0:
        return (math.nan, math.nan)
    p = errors / trials
    if errors < WILSON_BELOW:
        denom = 1.0 + z * z / trials
        centre = (p + z * z / (2 * trials)) / denom
        half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
        return (max(0.0, centre - half), min(1.0, centre + half))
    half = z * math.sqrt(p * (1 - p) / trials)
    return (max(0.0, p - half), min(1.0, p + half))


@dataclass(frozen=True)
class SerPoint:
    value: float
    detector: str
    trials: int
    errors: int
    overhead: float = math.nan
    mean_snr_db: float = math.nan
    erasures: int = 0

    @property
    def ser(self) -> float:
        return self.errors / self.trials if self.trials else math.nan

    @property
    def ci(self) -> tuple[float, float]:
        return ser_interval(self.errors, self.trials)

    @property
    def ci_half_width(self) -> float:
        lo, hi = self.ci
        return 0.5 * (hi - lo)

    @property
    def wilson(self) -> bool:
        return self.errors < WILSON_BELOW


@dataclass(frozen=True)
class Sweep:
    variable: str
    grid: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(x) for x in self.grid)
        if not g:
            raise ConfigError("sweep grid is empty")
        object.__setattr__(self, "grid", g)


@dataclass(frozen=True)
class SerCurve:
    variable: str
    grid: tuple[float, ...]
    points: tuple[SerPoint, ...]
    seed: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def detectors(self) -> tuple[str, ...]:
        seen: list[str] = []
        for p in self.points:
            if p.detector not in seen:
                seen.append(p.detector)
        return tuple(seen)

    def select(self, detector: str) -> tuple[SerPoint, ...]:
        return tuple(p for p in self.points if p.detector == detector)

    def ser(self, detector: str) -> np.ndarray:
        return np.array([p.ser for p in self.select(detector)])

    def point(self, detector: str, value: float) -> SerPoint:
        for p in self.select(detector):
            if math.isclose(p.value, value, rel_tol=1e-12, abs_tol=0.0):
                return p
        raise KeyError((detector, value))


def resolve_workers(workers: int | None) -> int:
    if workers is None or workers == 1:
        return 1
    if workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise ConfigError("workers must be >= 0")
    return workers


def run_units(fn: Callable[..., Any], units: Sequence[tuple], workers: int | None = 1) -> list:
    """Evaluate ``fn(*unit)`` for every unit; results come back in unit order."""
    n = resolve_workers(workers)
    if n == 1 or len(units) <= 1:
        return [fn(*u) for u in units]
    with ProcessPoolExecutor(max_workers=min(n, len(units))) as pool:
        futures = [pool.submit(fn, *u) for u in units]
        return [f.result() for f in futures]


def blocks(total: int, size: int) -> Iterable[tuple[int, int]]:
    for start in range(0, total, size):
        yield start, min(total, start + size)
