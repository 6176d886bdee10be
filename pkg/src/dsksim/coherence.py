"""Channel and direction coherence functions and coherence-time solvers.

Geometry convention: the BS antenna pair sits at the origin side, the MD
array center is at ``d*exp(j*theta)`` and element ``i`` at
``center + l_i*exp(j*phi_i)``. After a displacement of ``t_c*v`` along a
uniformly random heading the TDoA between the two elements changes; the
direction coherence function is the heading average of the normalised
correlation ``sinc(pi*B*dTDoA)``.

`j_dct_exact` reduces that heading average to a
one-dimensional integral over the angle change ``theta_e``. Its density
is ``(1/pi)*(d/s)*cos(x)/sqrt(1-(d/s)^2 sin^2 x)``, which integrates to one
and, after ``z = g*sin(u)``, leaves a smooth integrand over
``u in [-pi/2, pi/2]``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import j0

from .errors import (CoherenceRegimeWarning, InvalidArgumentError, NoCrossingError,
                     OutOfRegimeError)
from .geometry import C_LIGHT, MdArray
from .quadrature import QuadratureSpec, integrate

TWO_PI = 2.0 * math.pi
COHERENCE_THRESHOLD = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class CoherenceQuery:
    t_c: float = 0.0
    v: float = 30.0 / 3.6
    d: float = 100.0
    wavelength: float = 0.01
    B: float = 100e6
    l1: float = 0.1
    l2: float = 0.1
    phi1: float = 0.0
    phi2: float = math.pi
    theta: float = math.pi / 4
    df: float = 0.0
    df_prime: float = 0.0
    c: float = C_LIGHT

    def __post_init__(self):
        if not self.B > 0:
            raise InvalidArgumentError("B must be positive")
        if self.t_c < 0 or self.v < 0:
            raise InvalidArgumentError("t_c and v must be >= 0")
        if not (self.d > 0 and self.wavelength > 0 and self.c > 0):
            raise InvalidArgumentError("d, wavelength and c must be positive")

    @classmethod
    def from_carrier(cls, f_c: float, c: float = C_LIGHT, **kw) -> "CoherenceQuery":
        return cls(wavelength=c / f_c, c=c, **kw)

    def at(self, t_c: float) -> "CoherenceQuery":
        return replace(self, t_c=t_c)

    @property
    def step(self) -> float:
        return self.t_c * self.v

    @property
    def f_max(self) -> float:
        return self.step / self.wavelength

    @property
    def g_max(self) -> float:
        return self.step / self.d


def bessel_j0(x):
    """Zeroth-order Bessel function of the first kind (Cephes via SciPy)."""
    return j0(x)


def j_cct(q: CoherenceQuery) -> float:
    mismatch = abs(q.df - q.df_prime)
    if mismatch >= q.B:
        warnings.warn(f"frequency-offset mismatch {mismatch} Hz >= bandwidth; coherence clipped to 0",
                      CoherenceRegimeWarning, stacklevel=2)
        return 0.0
    return float((q.B - mismatch) / q.B * abs(bessel_j0(TWO_PI * q.f_max)))


def q_coefficients(q: CoherenceQuery) -> tuple[float, float]:
    q1 = q.l2 * math.cos(q.theta - q.phi2) - q.l1 * math.cos(q.theta - q.phi1)
    q2 = q.l2 * math.sin(q.theta - q.phi2) - q.l1 * math.sin(q.theta - q.phi1)
    return q1, q2


def _dct_integrand(q: CoherenceQuery, z):
    q1, q2 = q_coefficients(q)
    arg = (q.B / q.c) * (q1 * (1.0 - np.sqrt(1.0 - z * z)) - q2 * z)
    return np.sinc(arg)


def j_dct_exact(q: CoherenceQuery, spec: QuadratureSpec = QuadratureSpec(), *,
                arcsine_term: bool = False) -> float:
    """Direction coherence from the one-dimensional ``theta_e`` integral.

    ``arcsine_term=True`` adds ``(1/pi)*int sinc(..)/sqrt(1-z^2) dz``, a
    branch contribution that double counts part of the heading circle; it
    is kept only so that form can be evaluated for comparison.
    """
    g = q.g_max
    if g * math.sqrt(2.0) >= 1.0:
        raise OutOfRegimeError(f"t_c*v/d = {g:.4g} violates the small-angle regime (< 1/sqrt(2))")
    q1, q2 = q_coefficients(q)
    if g == 0.0:
        return 1.0 + (2.0 * math.asin(g) / math.pi if arcsine_term else 0.0)
    main = integrate(lambda u: _dct_integrand(q, g * np.sin(u)),
                     -math.pi / 2, math.pi / 2, spec, scale=math.pi).value / math.pi
    if arcsine_term:
        a = math.asin(g)
        main += integrate(lambda w: _dct_integrand(q, np.sin(w)), -a, a, spec,
                          scale=math.pi).value / math.pi
    return abs(main)


class McEstimate(NamedTuple):
    value: float
    stderr: float


def _pair_tdoa_change(q: CoherenceQuery, heading: np.ndarray) -> np.ndarray:
    ctr = q.d * complex(math.cos(q.theta), math.sin(q.theta))
    e1 = q.l1 * complex(math.cos(q.phi1), math.sin(q.phi1))
    e2 = q.l2 * complex(math.cos(q.phi2), math.sin(q.phi2))
    before = (abs(ctr + e2) - abs(ctr + e1)) / q.c
    moved = ctr + q.step * np.exp(1j * heading)
    after = (np.abs(moved + e2) - np.abs(moved + e1)) / q.c
    return after - before


def j_dct_mc(q: CoherenceQuery, n_samples: int = 1_000_000,
             rng: np.random.Generator | int | None = None, chunk: int = 1 << 18) -> McEstimate:
    """Monte Carlo heading average of ``sinc(pi*B*dTDoA)`` over exact geometry."""
    if n_samples < 10_000:
        raise InvalidArgumentError("n_samples must be >= 1e4")
    rng = np.random.default_rng(rng)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        k = min(chunk, n_samples - done)
        s = np.sinc(q.B * _pair_tdoa_change(q, rng.uniform(0.0, TWO_PI, k)))
        total += float(s.sum())
        total_sq += float(np.dot(s, s))
        done += k
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    return McEstimate(abs(mean), math.sqrt(var / (n_samples - 1)))


def j_dct_heading_average(q: CoherenceQuery, n_headings: int = 4096) -> float:
    """Deterministic heading average over exact geometry (periodic trapezoid rule).

    Unlike :func:`j_dct_exact` this has no small-angle restriction and stays
    valid for displacements comparable to or larger than ``d``.
    """
    heading = TWO_PI * np.arange(n_headings) / n_headings
    return float(abs(np.mean(np.sinc(q.B * _pair_tdoa_change(q, heading)))))


def theta_e_density(theta_e, d: float, step: float, *, arcsine_term: bool = False):
    """Density of the direction change for a uniformly random heading.

    Zero outside ``|sin(theta_e)| < step/d``. ``arcsine_term=True`` adds the
    constant ``1/pi`` on the support, matching :func:`j_dct_exact`'s option.
    """
    if not (d > 0 and 0 <= step < d):
        raise OutOfRegimeError("density requires 0 <= step < d")
    x = np.asarray(theta_e, dtype=float)
    r = d / step if step > 0 else np.inf
    s = np.sin(x)
    inside = (np.abs(s) * r < 1.0) & (np.abs(x) < math.pi / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = r * np.cos(x) / np.sqrt(1.0 - (r * s) ** 2) / math.pi
        if arcsine_term:
            dens = dens + 1.0 / math.pi
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out


def j_dct_lower_bound(q: CoherenceQuery) -> float:
    if not math.isclose(q.l1, q.l2, rel_tol=1e-12, abs_tol=0.0):
        raise InvalidArgumentError("the lower bound requires l1 == l2")
    return float(abs(bessel_j0(TWO_PI * (q.l1 * q.B / q.c) * q.g_max)))


def j_dct_array(q: CoherenceQuery, array: MdArray, spec: QuadratureSpec = QuadratureSpec()) -> float:
    """System direction coherence: the minimum of the pairwise values over all element pairs.

    The array center is placed at ``d*exp(j*theta)``; its own center is ignored.
    """
    worst = 1.0
    els = array.elements
    for a in range(len(els)):
        for b in range(a + 1, len(els)):
            pq = replace(q, l1=els[a][0], phi1=els[a][1], l2=els[b][0], phi2=els[b][1])
            worst = min(worst, j_dct_exact(pq, spec))
    return worst


def coherence_time(function: Callable[[float], float], threshold: float = COHERENCE_THRESHOLD,
                   *, t_max: float, t_min: float | None = None, growth: float = 1.02,
                   rtol: float = 1e-6) -> float:
    """Smallest ``t`` at which ``|function(t)|`` drops to ``threshold``.

    A geometric scan from ``t_min`` (default ``1e-9*t_max``) up to ``t_max``
    brackets the first crossing, then bisection refines it. Raises
    :class:`NoCrossingError` carrying ``lower_bound = t_max`` when the
    function stays above the threshold over the whole scan.
    """
    if not t_max > 0:
        raise InvalidArgumentError("t_max must be positive")
    if growth <= 1.0:
        raise InvalidArgumentError("growth must exceed 1")
    if not abs(function(0.0)) > threshold:
        raise NoCrossingError(f"|J(0)| does not exceed the threshold {threshold}")
    t_lo = 0.0
    t = t_min if t_min is not None else 1e-9 * t_max
    while True:
        t = min(t, t_max)
        if abs(function(t)) <= threshold:
            break
        if t >= t_max:
            raise NoCrossingError(
                f"no crossing of {threshold:.6g} for t <= {t_max:.6g} s", lower_bound=t_max)
        t_lo = t
        t *= growth
    t_hi = t
    while t_hi - t_lo > rtol * t_hi:
        mid = 0.5 * (t_lo + t_hi)
        if abs(function(mid)) <= threshold:
            t_hi = mid
        else:
            t_lo = mid
    return 0.5 * (t_lo + t_hi)


def dct_cct_ratio(d: float, wavelength: float, l: float, B: float, c: float = C_LIGHT) -> float:
    if min(d, wavelength, l, B, c) <= 0:
        raise InvalidArgumentError("all inputs must be positive")
    return (d / wavelength) * (c / (l * B))


def cct_closed_form(v: float, wavelength: float) -> float:
    """``(9/(16 pi)) * lambda / v`` from the small-argument Bessel expansion."""
    return 9.0 / (16.0 * math.pi) * wavelength / v


def dct_closed_form(d: float, v: float, l: float, B: float, c: float = C_LIGHT) -> float:
    return 9.0 / (16.0 * math.pi) * (d / v) * (c / (l * B))
