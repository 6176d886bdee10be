"""Gauss-Legendre quadrature with node doubling."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from .errors import InvalidArgumentError, NumericFailureError


@dataclass(frozen=True)
class QuadratureSpec:
    node_count: int = 64
    relative_tolerance: float = 1e-8
    max_doublings: int = 20

    def __post_init__(self):
        if self.node_count < 16:
            raise InvalidArgumentError("node_count must be >= 16")
        if not 0 < self.relative_tolerance <= 1e-3:
            raise InvalidArgumentError("relative_tolerance must lie in (0, 1e-3]")


@dataclass(frozen=True)
class QuadResult:
    value: float
    nodes: int
    change: float


@lru_cache(maxsize=32)
def _nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int) -> float:
    x, w = _nodes(n)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return float(half * np.dot(w, f(mid + half * x)))


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              spec: QuadratureSpec = QuadratureSpec(), scale: float = 0.0) -> QuadResult:
    """Integrate ``f`` over ``[a, b]``, doubling the node count until two
    successive estimates agree to ``relative_tolerance * max(|I|, scale)``.

    ``scale`` lets callers whose integral can be near zero state the
    magnitude against which the tolerance is measured.
    """
    n = spec.node_count
    prev = gauss_legendre(f, a, b, n)
    for _ in range(spec.max_doublings):
        n *= 2
        cur = gauss_legendre(f, a, b, n)
        change = abs(cur - prev)
        if not np.isfinite(cur):
            raise NumericFailureError(f"non-finite quadrature value at {n} nodes")
        if change <= spec.relative_tolerance * max(abs(cur), scale):
            return QuadResult(cur, n, change)
        prev = cur
    raise NumericFailureError(
        f"quadrature did not converge after {spec.max_doublings} doublings "
        f"(last estimate {cur!r}, last change {change:.3e}, {n} nodes)")
