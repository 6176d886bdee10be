"""Planar propagation geometry: positions, times of arrival and TDoA fingerprints.

Positions are handled as :class:`Point2D` values at the API boundary and as
complex numbers (``x + 1j*y``) inside vectorised helpers, which keeps the
distance computations to a single ``abs`` call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, OutOfRegimeError

C_LIGHT = 3.0e8
TWO_PI = 2.0 * math.pi


def _wrap(angle: float) -> float:
    a = math.fmod(angle, TWO_PI)
    if a < 0.0:
        a += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    return 0.0 if a >= TWO_PI else a


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidArgumentError(f"non-finite coordinate ({self.x}, {self.y})")

    @classmethod
    def from_complex(cls, z: complex) -> "Point2D":
        return cls(float(z.real), float(z.imag))

    @classmethod
    def polar(cls, radius: float, angle: float) -> "Point2D":
        return cls(radius * math.cos(angle), radius * math.sin(angle))

    def as_complex(self) -> complex:
        return complex(self.x, self.y)

    def distance(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class MdArray:
    """Rigid receive array: a center plus elements at polar offsets ``(l_n, phi_n)``."""

    center: Point2D
    elements: tuple[tuple[float, float], ...]

    def __post_init__(self):
        elems = tuple((float(l), _wrap(float(phi))) for l, phi in self.elements)
        if len(elems) < 2:
            raise InvalidArgumentError("an array needs at least 2 elements")
        if any(l < 0 or not math.isfinite(l) for l, _ in elems):
            raise InvalidArgumentError("element radii must be finite and >= 0")
        object.__setattr__(self, "elements", elems)

    @property
    def n_elements(self) -> int:
        return len(self.elements)

    def offsets(self) -> np.ndarray:
        """Element offsets from the center as a complex vector."""
        l = np.array([e[0] for e in self.elements])
        phi = np.array([e[1] for e in self.elements])
        return l * np.exp(1j * phi)

    def positions(self) -> np.ndarray:
        """World positions of the elements as a complex vector."""
        return self.center.as_complex() + self.offsets()

    def element(self, n: int) -> Point2D:
        l, phi = self.elements[n]
        return Point2D(self.center.x + l * math.cos(phi), self.center.y + l * math.sin(phi))


@dataclass(frozen=True)
class MobilityState:
    speed: float
    heading: float

    def __post_init__(self):
        if self.speed < 0:
            raise InvalidArgumentError("speed must be >= 0")
        object.__setattr__(self, "heading", _wrap(float(self.heading)))

    @classmethod
    def random(cls, speed: float, rng: np.random.Generator) -> "MobilityState":
        return cls(speed, rng.uniform(0.0, TWO_PI))


@dataclass(frozen=True)
class TdoaFingerprint:
    """Delays of elements 2..N relative to element 1 for one transmitter.

    ``transmitter_index`` is zero-based throughout the package.
    """

    transmitter_index: int
    deltas: tuple[float, ...]
    carrier: float
    _full: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        full = np.concatenate(([0.0], np.asarray(self.deltas, dtype=float)))
        full.setflags(write=False)
        object.__setattr__(self, "_full", full)

    @property
    def n_elements(self) -> int:
        return len(self.deltas) + 1

    @property
    def relative_delays(self) -> np.ndarray:
        """Length-N vector of delays relative to element 1 (first entry 0)."""
        return self._full

    def pair_delay(self, l: int, k: int) -> float:
        """Delay of element ``l`` minus delay of element ``k`` (zero-based)."""
        return float(self._full[l] - self._full[k])


def circular_array(center: Point2D, n: int, radius: float) -> MdArray:
    """Uniform circular array with element ``k`` at angle ``2*pi*k/n``."""
    return MdArray(center, tuple((radius, TWO_PI * k / n) for k in range(n)))


def linear_array(center: Point2D, n: int, spacing: float, orientation: float = 0.0) -> MdArray:
    """Uniform linear array centred on ``center`` along direction ``orientation``."""
    elems = []
    for k in range(n):
        s = (k - (n - 1) / 2.0) * spacing
        elems.append((abs(s), orientation if s >= 0 else orientation + math.pi))
    return MdArray(center, tuple(elems))


def toa(tx: Point2D, rx: Point2D, c: float = C_LIGHT) -> float:
    if c <= 0:
        raise InvalidArgumentError("c must be positive")
    return tx.distance(rx) / c


def toa_many(tx: complex | np.ndarray, rx: complex | np.ndarray, c: float = C_LIGHT) -> np.ndarray:
    """Vectorised ToA between complex positions (broadcasting)."""
    if c <= 0:
        raise InvalidArgumentError("c must be positive")
    return np.abs(np.asarray(rx) - np.asarray(tx)) / c


def mirror_image(tx: Point2D, line: tuple[Point2D, tuple[float, float]]) -> Point2D:
    """Reflect ``tx`` across the line through ``line[0]`` with direction ``line[1]``."""
    p0, (dx, dy) = line
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise InvalidArgumentError("reflection direction has zero length")
    u = complex(dx / norm, dy / norm)
    rel = tx.as_complex() - p0.as_complex()
    # reflection about a unit direction u: u^2 * conj(rel)
    img = p0.as_complex() + u * u * rel.conjugate()
    return Point2D.from_complex(img)


def fingerprint(tx: Point2D, array: MdArray, c: float = C_LIGHT, f_c: float = 30e9,
                index: int = 0) -> TdoaFingerprint:
    if array.n_elements < 2:
        raise InvalidArgumentError("fingerprint needs N >= 2")
    t = [toa(tx, array.element(n), c) for n in range(array.n_elements)]
    return TdoaFingerprint(index, tuple(tk - t[0] for tk in t[1:]), f_c)


def fingerprints(transmitters: Sequence[Point2D], array: MdArray, c: float = C_LIGHT,
                 f_c: float = 30e9) -> tuple[TdoaFingerprint, ...]:
    return tuple(fingerprint(tx, array, c, f_c, m) for m, tx in enumerate(transmitters))


def displace(array: MdArray, mobility: MobilityState, t_c: float) -> MdArray:
    """Translate the array rigidly by ``t_c * speed`` along the heading."""
    if t_c < 0:
        raise InvalidArgumentError("t_c must be >= 0")
    if t_c == 0 or mobility.speed == 0:
        return array
    step = t_c * mobility.speed
    ctr = Point2D(array.center.x + step * math.cos(mobility.heading),
                  array.center.y + step * math.sin(mobility.heading))
    return MdArray(ctr, array.elements)


def theta_e(d: float, theta: float, step: float, heading: float) -> float:
    """Angle ``theta - theta'`` between the old and new BS-to-MD directions.

    The MD starts at ``d*exp(j*theta)`` relative to the BS and moves by
    ``step*exp(j*heading)``.
    """
    if step >= d:
        raise OutOfRegimeError(f"step {step} must be smaller than the distance {d}")
    if step == 0:
        return 0.0
    # rotate into the frame of the original direction so the result is exact near 0
    w = d + step * complex(math.cos(heading - theta), math.sin(heading - theta))
    return -math.atan2(w.imag, w.real)


def theta_e_many(d: float, theta: float, step: float, heading: np.ndarray) -> np.ndarray:
    if step >= d:
        raise OutOfRegimeError(f"step {step} must be smaller than the distance {d}")
    w = d + step * np.exp(1j * (np.asarray(heading) - theta))
    return -np.angle(w)
