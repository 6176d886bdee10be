import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsksim.coherence import (CoherenceQuery, bessel_j0, cct_closed_form, coherence_time,
                              dct_cct_ratio, dct_closed_form, j_cct, j_dct_array, j_dct_exact,
                              j_dct_heading_average, j_dct_lower_bound, j_dct_mc, q_coefficients,
                              theta_e_density)
from dsksim.errors import (CoherenceRegimeWarning, InvalidArgumentError, NoCrossingError,
                           NumericFailureError, OutOfRegimeError)
from dsksim.geometry import C_LIGHT, Point2D, circular_array, theta_e_many
from dsksim.quadrature import QuadratureSpec, integrate

KMH = 1 / 3.6
BASE = CoherenceQuery.from_carrier(30e9, v=30 * KMH, d=100.0, B=100e6, l1=0.05, l2=0.05,
                                   phi1=0.0, phi2=math.pi, theta=math.pi / 4)


def test_bessel_against_mpmath():
    xs = np.concatenate((np.linspace(0, 30, 301), [9 / 8, 2.404825557695773]))
    for x in xs:
        assert bessel_j0(x) == pytest.approx(float(mpmath.besselj(0, x)), abs=1e-15)


def test_bessel_examples():
    assert bessel_j0(0.0) == 1.0
    assert bessel_j0(9 / 8) == pytest.approx(1 / math.sqrt(2), abs=2e-3)
    root = float(mpmath.findroot(lambda x: mpmath.besselj(0, x), 2.4))
    assert abs(bessel_j0(2.404826)) <= 1e-5
    assert abs(bessel_j0(root)) <= 1e-15


def test_j_cct_examples():
    q = CoherenceQuery.from_carrier(30e9, v=100 * KMH)
    assert j_cct(q) == 1.0
    assert j_cct(CoherenceQuery(df=5e7, df_prime=0.0, B=1e8)) == pytest.approx(0.5)
    with pytest.warns(CoherenceRegimeWarning):
        assert j_cct(CoherenceQuery(df=2e8, B=1e8)) == 0.0


def test_cct_coherence_times():
    fast = CoherenceQuery.from_carrier(30e9, v=100 * KMH)
    t = coherence_time(lambda t: j_cct(fast.at(t)), t_max=1.0)
    assert t == pytest.approx(0.64e-4, rel=2e-2)
    assert t == pytest.approx(6.4536e-5, rel=1e-4)
    slow = CoherenceQuery.from_carrier(30e9, v=30 * KMH)
    t_slow = coherence_time(lambda t: j_cct(slow.at(t)), t_max=1.0)
    assert cct_closed_form(30 * KMH, 0.01) == pytest.approx(2.15e-4, rel=2e-3)
    # the closed form comes from the small-argument expansion of J0; agreement to ~0.2%
    assert t_slow == pytest.approx(cct_closed_form(30 * KMH, 0.01), rel=5e-3)


def test_q_coefficients_examples():
    assert q_coefficients(CoherenceQuery(l1=0.1, l2=0.1, phi1=0.4, phi2=0.4)) == pytest.approx((0.0, 0.0), abs=1e-17)
    assert q_coefficients(CoherenceQuery(l1=0.0, l2=0.3, phi2=1.0, theta=1.0)) == pytest.approx((0.3, 0.0))
    q = CoherenceQuery(l1=0.05, l2=0.05, phi1=0.0, phi2=math.pi, theta=math.pi / 3)
    q1 = 0.05 * math.cos(math.pi / 3 - math.pi) - 0.05 * math.cos(math.pi / 3)
    q2 = 0.05 * math.sin(math.pi / 3 - math.pi) - 0.05 * math.sin(math.pi / 3)
    assert q_coefficients(q) == pytest.approx((q1, q2), abs=1e-17)
    assert q_coefficients(q) == pytest.approx((-0.05, -0.05 * math.sqrt(3)), abs=1e-15)


def test_j_dct_exact_trivial_values():
    assert j_dct_exact(BASE) == 1.0
    flat = CoherenceQuery(l1=0.1, l2=0.1, phi1=0.3, phi2=0.3)
    for t in (0.1, 1.0, 5.0):
        assert j_dct_exact(flat.at(t)) == pytest.approx(1.0, abs=1e-12)


def test_j_dct_exact_against_monte_carlo_at_point_one_second():
    q = BASE.at(0.1)
    mc = j_dct_mc(q, 1_000_000, np.random.default_rng(3))
    assert j_dct_exact(q) == pytest.approx(mc.value, abs=1e-2)
    assert abs(j_dct_exact(q) - mc.value) <= 3 * mc.stderr + 1e-12


@pytest.mark.parametrize("d, B, l, tol", [
    (100.0, 100e6, 0.05, 1e-10),
    (100.0, 100e6, 0.1, 1e-9),
    # larger apertures expose the far-field step inside the one-dimensional form
    (50.0, 3e9, 0.3, 1e-5),
])
def test_j_dct_exact_against_deterministic_heading_average(d, B, l, tol):
    q0 = CoherenceQuery.from_carrier(30e9, v=30 * KMH, d=d, B=B, l1=l, l2=l,
                                     phi1=0.2, phi2=0.2 + math.pi, theta=1.0)
    for t in np.linspace(0.1, 0.99 * d / math.sqrt(2) / (30 * KMH), 7):
        q = q0.at(float(t))
        assert j_dct_exact(q) == pytest.approx(j_dct_heading_average(q, 1 << 14), abs=tol)


def test_mc_examples():
    assert j_dct_mc(BASE, 10_000, np.random.default_rng(0)).value == 1.0
    with pytest.raises(InvalidArgumentError):
        j_dct_mc(BASE, 100)
    # far outside the small-angle regime the sampler still follows the exact geometry
    q = BASE.at(0.5 * BASE.d / BASE.v * 1.6)
    mc = j_dct_mc(q, 200_000, np.random.default_rng(2))
    assert mc.value == pytest.approx(j_dct_heading_average(q, 1 << 15), abs=4 * mc.stderr + 1e-9)


def test_regime_guard():
    t_edge = BASE.d / (math.sqrt(2) * BASE.v)
    with pytest.raises(OutOfRegimeError):
        j_dct_exact(BASE.at(1.001 * t_edge))
    j_dct_exact(BASE.at(0.999 * t_edge))


def test_exact_form_ignores_printed_branch_term():
    q = BASE.at(3.0)
    plain = j_dct_exact(q)
    printed = j_dct_exact(q, arcsine_term=True)
    assert printed > 1.0
    assert plain == pytest.approx(j_dct_heading_average(q), abs=1e-9)


def test_theta_e_density_examples():
    d, s = 100.0, 5.0
    assert theta_e_density(0.0, d, s, arcsine_term=True) == pytest.approx((d / s + 1) / math.pi)
    assert theta_e_density(0.0, d, s) == pytest.approx(d / s / math.pi)
    assert theta_e_density(0.3, d, s) == 0.0


@pytest.mark.parametrize("ratio", [0.001, 0.01, 0.1])
def test_theta_e_density_normalised(ratio):
    d = 100.0
    # substitute sin(x) = ratio*sin(u) to remove the endpoint singularity
    f = lambda u: theta_e_density(np.arcsin(ratio * np.sin(u)) * (1 - 1e-15), d, ratio * d) \
        * ratio * np.cos(u) / np.sqrt(1 - (ratio * np.sin(u)) ** 2)
    total = integrate(f, -math.pi / 2, math.pi / 2, QuadratureSpec(64, 1e-10)).value
    assert total == pytest.approx(1.0, abs=1e-6)


def test_theta_e_density_matches_histogram():
    d, step = 100.0, 10.0
    heading = np.random.default_rng(7).uniform(0, 2 * math.pi, 1_000_000)
    samples = theta_e_many(d, 0.4, step, heading)
    edge = math.asin(step / d)
    bins = np.linspace(-0.9 * edge, 0.9 * edge, 41)
    hist, _ = np.histogram(samples, bins=bins)
    width = bins[1] - bins[0]
    emp = hist / (len(samples) * width)
    mids = 0.5 * (bins[1:] + bins[:-1])
    # exact bin averages of the density, via its antiderivative asin((d/s) sin x)/pi
    cdf = lambda x: np.arcsin(np.clip((d / step) * np.sin(x), -1, 1)) / math.pi
    exact = (cdf(bins[1:]) - cdf(bins[:-1])) / width
    assert np.max(np.abs(emp - exact)) <= 2e-2 * np.max(exact)
    assert np.max(np.abs(theta_e_density(mids, d, step) - exact) / exact) < 0.02


def test_lower_bound_examples():
    q = CoherenceQuery.from_carrier(30e9, v=30 * KMH, d=100.0, B=100e6, l1=0.1, l2=0.1)
    assert j_dct_lower_bound(q) == 1.0
    t_star = dct_closed_form(100.0, 30 * KMH, 0.1, 100e6)
    assert j_dct_lower_bound(q.at(t_star)) == pytest.approx(float(mpmath.besselj(0, 9 / 8)), rel=1e-12)
    assert j_dct_lower_bound(q.at(t_star)) == pytest.approx(1 / math.sqrt(2), abs=2e-3)
    t_b = coherence_time(lambda t: j_dct_lower_bound(q.at(t)), t_max=1e4)
    assert t_b == pytest.approx(t_star, rel=2e-3)
    with pytest.raises(InvalidArgumentError):
        j_dct_lower_bound(CoherenceQuery(l1=0.1, l2=0.2))


def test_lower_bound_ordering_on_a_grid():
    base = CoherenceQuery.from_carrier(30e9, v=30 * KMH, d=100.0, B=100e6, l1=0.05, l2=0.05)
    t_hi = 0.999 * base.d / (math.sqrt(2) * base.v)
    for theta in np.linspace(0, 2 * math.pi, 5, endpoint=False):
        q0 = CoherenceQuery.from_carrier(30e9, v=30 * KMH, d=100.0, B=100e6, l1=0.05, l2=0.05,
                                         phi1=0.0, phi2=math.pi, theta=float(theta))
        for t in np.linspace(0, t_hi, 20):
            q = q0.at(float(t))
            assert j_dct_exact(q) >= j_dct_lower_bound(q) - 1e-6


def test_lower_bound_fails_for_large_apertures():
    # l*B/c around 1.7: the exact coherence dips below the Bessel bound
    q0 = CoherenceQuery.from_carrier(30e9, v=30 * KMH, d=50.0, B=1e9, l1=0.5, l2=0.5,
                                     phi1=0.0, phi2=math.pi, theta=math.pi / 2)
    t_hi = 0.999 * q0.d / (math.sqrt(2) * q0.v)
    margins = [j_dct_exact(q0.at(float(t))) - j_dct_lower_bound(q0.at(float(t)))
               for t in np.linspace(0, t_hi, 40)]
    assert min(margins) < -0.05


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.7), st.floats(0.0, 2 * math.pi), st.floats(0.01, 0.5), st.floats(0.0, 2 * math.pi))
def test_j_dct_exact_range(g, theta, l, phi):
    q = CoherenceQuery.from_carrier(30e9, v=10.0, d=100.0, B=1e9, l1=l, l2=0.2, phi1=phi,
                                    phi2=phi + 2.0, theta=theta).at(g * 100.0 / 10.0)
    val = j_dct_exact(q)
    assert 0.0 <= val <= 1.0 + 1e-9


def test_j_dct_array_is_minimum_over_pairs():
    arr = circular_array(Point2D(0, 0), 5, 0.3)
    q = CoherenceQuery.from_carrier(30e9, v=10.0, d=60.0, B=2e9, theta=0.7).at(3.0)
    vals = []
    for a in range(5):
        for b in range(a + 1, 5):
            pq = CoherenceQuery.from_carrier(30e9, v=10.0, d=60.0, B=2e9, theta=0.7,
                                             l1=0.3, phi1=2 * math.pi * a / 5,
                                             l2=0.3, phi2=2 * math.pi * b / 5).at(3.0)
            vals.append(j_dct_exact(pq))
    assert j_dct_array(q, arr) == pytest.approx(min(vals), abs=1e-15)


def test_coherence_time_errors():
    with pytest.raises(NoCrossingError):
        coherence_time(lambda t: 1.0, threshold=1.0, t_max=1.0)
    with pytest.raises(NoCrossingError) as info:
        coherence_time(lambda t: 0.9, t_max=2.0)
    assert info.value.lower_bound == 2.0
    with pytest.raises(InvalidArgumentError):
        coherence_time(lambda t: 1.0, t_max=-1.0)


def test_coherence_time_finds_first_crossing():
    # cos(t) first reaches 1/sqrt(2) at pi/4, again at 7pi/4
    t = coherence_time(lambda t: math.cos(t), t_max=10.0, rtol=1e-10)
    assert t == pytest.approx(math.pi / 4, rel=1e-8)


def test_ratio_examples():
    assert dct_cct_ratio(100.0, 0.01, 0.1, 100e6) == pytest.approx(3e5)
    assert dct_cct_ratio(100.0, 0.01, 1.0, C_LIGHT) == pytest.approx(1e4)
    ds = [1.0, 10.0, 100.0, 1000.0]
    r = [dct_cct_ratio(d, 0.01, 0.1, 1e8) for d in ds]
    assert all(b > a for a, b in zip(r, r[1:]))
    assert dct_closed_form(100, 30 * KMH, 0.1, 1e8) / cct_closed_form(30 * KMH, 0.01) == pytest.approx(3e5)


def test_quadrature_reports_nonconvergence():
    spec = QuadratureSpec(16, 1e-12, max_doublings=2)
    with pytest.raises(NumericFailureError, match="did not converge"):
        integrate(lambda x: np.sin(1e4 * x) + 1.0, 0.0, 1.0, spec)


def test_quadrature_on_smooth_integrand():
    res = integrate(np.exp, 0.0, 1.0)
    assert res.value == pytest.approx(math.e - 1, rel=1e-14)


def test_query_validation():
    with pytest.raises(InvalidArgumentError):
        CoherenceQuery(B=0.0)
    with pytest.raises(InvalidArgumentError):
        CoherenceQuery(t_c=-1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        j_cct(CoherenceQuery(df=1.0, df_prime=2.0))
