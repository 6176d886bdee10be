"""Fast self-checks of the core numerics, run by ``dsksim validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..coherence import CoherenceQuery, bessel_j0, j_dct_exact, j_dct_lower_bound
from ..detection import DskReference, NoiseWindow, analytic_observation, dsk_pair_terms
from ..geometry import Point2D, circular_array, fingerprints, theta_e_many
from ..impairments import LinkBudget, dbm_to_watts, snr
from ..waveform import GridSpec, SincPulse, cross_correlate, kernel, synthesize, truncation_loss
from .config import ExperimentConfig


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


def _kernel_parseval(cfg: ExperimentConfig) -> Check:
    pulse = SincPulse(cfg.circular.B)
    spec = GridSpec(pulse, 16, 64)
    clean = synthesize(pulse, 1.0, 0.0, 0.0, spec=spec)
    lags = np.linspace(-4, 4, 9) * pulse.period
    err = max(abs(cross_correlate(clean, clean, d) - kernel(pulse, d)) for d in lags)
    budget = 1.05 * truncation_loss(64) * pulse.energy
    even = bool(np.all(kernel(pulse, lags) == kernel(pulse, -lags)))
    ok = even and err <= budget
    return Check("kernel/Parseval", ok,
                 f"max |sampled - kernel| = {err / pulse.energy:.3e} E_s "
                 f"(truncation budget {budget / pulse.energy:.3e} E_s), even={even}")


def _identity(cfg: ExperimentConfig) -> Check:
    c = cfg.circular
    pulse = SincPulse(c.B)
    tx = [Point2D.polar(c.cell_radius, 2 * math.pi * m / c.M) for m in range(c.M)]
    arr = circular_array(Point2D(13.0, -27.0), c.N, c.array_radius)
    ref = DskReference(fingerprints(tx, arr, c.c, c.f_c), c.f_c)
    worst = 0.0
    for v in range(c.M):
        tau = np.abs(tx[v].as_complex() - arr.positions()) / c.c
        alpha = c.rho * np.exp(-2j * math.pi * np.fmod(c.f_c * tau, 1.0))
        obs = analytic_observation(NoiseWindow(pulse, c.window_bins), ref, alpha, tau - tau[0])
        terms = dsk_pair_terms(obs, ref, v)
        worst = max(worst, float(np.max(np.abs(terms / (c.rho**2 * pulse.energy) - 1.0))))
    return Check("pair-term identity", worst <= 1e-9, f"max relative deviation {worst:.3e}")


def _bound_ordering(cfg: ExperimentConfig) -> Check:
    s = cfg.coherence
    worst = math.inf
    for theta in np.linspace(0.0, math.pi, 5, endpoint=False):
        q0 = CoherenceQuery.from_carrier(s.f_c, c=s.c, v=s.v, d=s.d, B=s.B, l1=s.l, l2=s.l,
                                         phi1=s.phi1, phi2=s.phi2, theta=float(theta))
        for t in np.linspace(0.0, 0.999 * s.t_regime, 6):
            q = q0.at(float(t))
            worst = min(worst, j_dct_exact(q) - j_dct_lower_bound(q))
    return Check("lower-bound ordering", worst >= -1e-6, f"min(exact - bound) = {worst:.3e}")


def _theta_e(cfg: ExperimentConfig) -> Check:
    rng = np.random.default_rng(1)
    worst = 0.0
    for step_ratio in (1e-3, 1e-2, 0.1, 0.5):
        d, theta = 100.0, float(rng.uniform(0, 2 * math.pi))
        heading = rng.uniform(0, 2 * math.pi, 1000)
        te = theta_e_many(d, theta, step_ratio * d, heading)
        resid = d * np.sin(te) + step_ratio * d * np.sin(heading - (theta - te))
        worst = max(worst, float(np.max(np.abs(resid))))
    return Check("theta_e constraint", worst <= 1e-12, f"max residual {worst:.3e}")


def _bessel(_: ExperimentConfig) -> Check:
    val = float(bessel_j0(9.0 / 8.0))
    dev = abs(val - 1.0 / math.sqrt(2.0))
    return Check("J0(9/8) anchor", dev <= 2e-3, f"J0(9/8) = {val:.6f}, |dev| = {dev:.2e}")


def _snr_budget(cfg: ExperimentConfig) -> Check:
    c = cfg.rsu.c
    budget = LinkBudget(dbm_to_watts(5.0), 30e9, 1e-12, c)
    rep = snr(budget, 50.0, 5)
    rel = abs(rep.per_antenna / 0.801 - 1.0)
    gain = rep.array_db - rep.per_antenna_db
    ok = rel <= 5e-3 and abs(gain - 10 * math.log10(5)) <= 1e-9
    return Check("SNR budget", ok, f"SNR = {rep.per_antenna:.4f} (rel dev {rel:.2e}), "
                                   f"array gain {gain:.3f} dB")


CHECKS: tuple[Callable[[ExperimentConfig], Check], ...] = (
    _kernel_parseval, _identity, _bound_ordering, _theta_e, _bessel, _snr_budget)


def run_checks(cfg: ExperimentConfig) -> list[Check]:
    out = []
    for fn in CHECKS:
        try:
            out.append(fn(cfg))
        except Exception as exc:  # a crashing check is a failing check
            out.append(Check(fn.__name__.strip("_"), False, f"raised {type(exc).__name__}: {exc}"))
    return out
