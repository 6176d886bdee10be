import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsksim.detection import (CorrelationObservation, CsiReference, DskReference, NoiseWindow,
                              PhaseFeature, SampledObservation, ConsistencyError,
                              analytic_observation, dsk_detect, dsk_detect_feature,
                              dsk_detect_magnitude, dsk_pair_terms, dsk_statistic,
                              dsk_statistic_magnitude, dsk_statistics, estimate_csi_reference,
                              estimate_phase_feature, feature_decide_batch, pair_indices,
                              phase_feature, ssk_detect)
from dsksim.errors import DegenerateReferenceError, InvalidArgumentError
from dsksim.geometry import C_LIGHT, Point2D, TdoaFingerprint, circular_array, fingerprints
from dsksim.scenarios.cell import (CircularCellConfig, build_circular_cell, draw_trials,
                                   simulate_trials)
from dsksim.waveform import GridSpec, SincPulse, synthesize, truncation_loss

F_C = 30e9
B = 100e6
PULSE = SincPulse(B)
E_S = PULSE.energy
TX4 = [Point2D.polar(100.0, 2 * math.pi * m / 4) for m in range(4)]


def _setup(center=Point2D(13.0, -27.0), n=7, tx=TX4):
    arr = circular_array(center, n, 0.1)
    ref = DskReference(fingerprints(tx, arr, C_LIGHT, F_C), F_C)
    return arr, ref


def _received(tx: Point2D, arr, rho=1.0):
    tau = np.abs(tx.as_complex() - arr.positions()) / C_LIGHT
    alpha = rho * np.exp(-2j * math.pi * np.fmod(F_C * tau, 1.0))
    return alpha, tau - tau[0]


def test_pair_indices_order_and_weights():
    i, j, w = pair_indices(4)
    assert list(zip(i, j)) == [(1, 0), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)]
    np.testing.assert_array_equal(w, [1, 1 / 2, 1 / 2, 1 / 3, 1 / 3, 1 / 3])


@pytest.mark.parametrize("rho", [1.0, 0.37])
def test_noiseless_true_candidate_statistic(rho):
    arr, ref = _setup()
    window = NoiseWindow(PULSE)
    for v in range(4):
        alpha, delays = _received(TX4[v], arr, rho)
        obs = analytic_observation(window, ref, alpha, delays)
        np.testing.assert_allclose(dsk_pair_terms(obs, ref, v), rho**2 * E_S, rtol=1e-9)
        assert dsk_statistic(obs, ref, v) == pytest.approx(6 * rho**2 * E_S, rel=1e-9)
        assert dsk_statistic_magnitude(obs, ref, v) == pytest.approx(6 * rho**2 * E_S, rel=1e-9)
        assert dsk_detect(obs, ref) == v


def _separated_reference(n: int, sep: float):
    """True delays plus a candidate whose every pair TDoA is off by at least ``sep``."""
    rng = np.random.default_rng(4)
    true = np.concatenate(([0.0], rng.uniform(-3e-10, 3e-10, n - 1)))
    offset = sep * np.arange(n)
    wrong = true + offset
    fps = (TdoaFingerprint(0, tuple(true[1:] - true[0]), F_C),
           TdoaFingerprint(1, tuple(wrong[1:] - wrong[0]), F_C))
    alpha = np.exp(-2j * math.pi * np.fmod(F_C * (true + 5e-7), 1.0))
    return DskReference(fps, F_C), alpha, true


def test_wrong_candidate_statistic_is_small():
    # sidelobes of sinc stay below 0.05 once every pair mismatch exceeds 6.4/B
    ref, alpha, delays = _separated_reference(7, 6.4 / B)
    obs = analytic_observation(NoiseWindow(PULSE), ref, alpha, delays)
    assert abs(dsk_statistic(obs, ref, 1)) <= 0.05 * 6 * E_S
    assert dsk_statistic(obs, ref, 0) == pytest.approx(6 * E_S, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.floats(5.0, 40.0), st.integers(2, 8))
def test_wrong_candidate_bounded_by_first_sidelobe(sep_periods, n):
    ref, alpha, delays = _separated_reference(n, sep_periods / B)
    obs = analytic_observation(NoiseWindow(PULSE), ref, alpha, delays)
    # |sinc(x)| <= 1/(pi*x) for x >= 5, at most 1/(5 pi) per pair term
    assert abs(dsk_statistic(obs, ref, 1)) <= (n - 1) * E_S / (5 * math.pi)


def test_zero_signal_gives_zero_statistic():
    arr, ref = _setup()
    alpha, delays = _received(TX4[0], arr, rho=0.0)
    obs = analytic_observation(NoiseWindow(PULSE), ref, alpha, delays)
    np.testing.assert_array_equal(dsk_statistics(obs, ref), 0.0)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 2 * math.pi), st.integers(0, 3), st.integers(0, 2**32 - 1))
def test_common_rotation_leaves_statistics_unchanged(theta, v, seed):
    arr, ref = _setup()
    window = NoiseWindow(PULSE)
    alpha, delays = _received(TX4[v], arr)
    noise = window.noise_bins(E_S / 3.0, (7,), np.random.default_rng(seed))
    rot = np.exp(1j * theta)
    plain = analytic_observation(window, ref, alpha, delays, noise)
    turned = analytic_observation(window, ref, alpha * rot, delays, noise * rot)
    s0, s1 = dsk_statistics(plain, ref), dsk_statistics(turned, ref)
    np.testing.assert_allclose(s1, s0, rtol=1e-12, atol=1e-12 * E_S)
    assert dsk_detect(turned, ref) == dsk_detect(plain, ref)


def test_magnitude_invariant_to_per_antenna_phases():
    arr, ref = _setup()
    alpha, delays = _received(TX4[2], arr)
    phases = np.exp(1j * np.random.default_rng(1).uniform(0, 2 * math.pi, 7))
    window = NoiseWindow(PULSE)
    a = analytic_observation(window, ref, alpha, delays)
    b = analytic_observation(window, ref, alpha * phases, delays)
    for m in range(4):
        assert dsk_statistic_magnitude(b, ref, m) == pytest.approx(dsk_statistic_magnitude(a, ref, m), rel=1e-12)
    assert dsk_detect_magnitude(b, ref) == 2


def test_magnitude_detector_agrees_with_real_part_detector():
    # needs an aperture comparable to c/B, otherwise every |C| is ~rho^2 E_s
    cfg = CircularCellConfig(snr_db=10.0, array_radius=3.0)
    cell = build_circular_cell(cfg)
    out = simulate_trials(cell, draw_trials(cell, 17, 0, 0, 4000))
    assert np.mean(out.dsk == out.dsk_magnitude) >= 0.95


def test_magnitude_detector_is_blind_with_a_small_aperture():
    cell = build_circular_cell(CircularCellConfig(snr_db=14.0))
    out = simulate_trials(cell, draw_trials(cell, 17, 0, 0, 4000))
    assert np.mean(out.dsk != out.truth) < 1e-3
    assert np.mean(out.dsk_magnitude != out.truth) > 0.4


def test_noiseless_detection_is_exhaustively_correct():
    cfg = CircularCellConfig(snr_db=math.inf)
    cell = build_circular_cell(cfg)
    draws = draw_trials(cell, 123, 0, 0, 100)
    for v in range(cfg.M):
        forced = type(draws)(draws.center, np.full(100, v), draws.heading, draws.df_unit,
                             draws.noise_unit)
        out = simulate_trials(cell, forced)
        assert np.all(out.dsk == v) and np.all(out.ssk == v)


def test_sampled_path_matches_analytic_path():
    n = 3
    tx = [Point2D.polar(100.0, 0.0), Point2D.polar(100.0, math.pi)]
    arr = circular_array(Point2D(20.0, 35.0), n, 0.1)
    ref = DskReference(fingerprints(tx, arr, C_LIGHT, F_C), F_C)
    spec = GridSpec(PULSE, 32, 128)
    for v in range(2):
        alpha, delays = _received(tx[v], arr)
        analytic = analytic_observation(NoiseWindow(PULSE), ref, alpha, delays)
        tau = np.abs(tx[v].as_complex() - arr.positions()) / C_LIGHT
        grids = tuple(synthesize(PULSE, 1.0, d, F_C, spec=spec) for d in delays)
        # the carrier phase of the sampled copies is referenced to element 0's absolute delay
        common = np.exp(-2j * math.pi * np.fmod(F_C * tau[0], 1.0))
        grids = tuple(type(g)(g.spec, g.samples * common) for g in grids)
        sampled = SampledObservation(grids)
        for m in range(2):
            diff = dsk_pair_terms(sampled, ref, m) - dsk_pair_terms(analytic, ref, m)
            assert np.max(np.abs(diff)) <= 1e-3 * E_S
        assert np.max(np.abs(dsk_pair_terms(sampled, ref, v) / E_S - 1)) <= 1.05 * truncation_loss(128)


def test_ties_break_to_lowest_index():
    arr = circular_array(Point2D(5.0, 5.0), 4, 0.1)
    fp = fingerprints([TX4[1], TX4[1], TX4[1]], arr)
    ref = DskReference(fp, F_C)
    alpha, delays = _received(TX4[1], arr)
    assert dsk_detect(analytic_observation(NoiseWindow(PULSE), ref, alpha, delays), ref) == 0
    h = np.ones((3, 4))
    assert ssk_detect(np.zeros(4), CsiReference(h)) == 0


def test_detect_needs_two_candidates():
    arr = circular_array(Point2D(5.0, 5.0), 4, 0.1)
    ref = DskReference(fingerprints([TX4[0]], arr), F_C)
    alpha, delays = _received(TX4[0], arr)
    with pytest.raises(InvalidArgumentError):
        dsk_detect(analytic_observation(NoiseWindow(PULSE), ref, alpha, delays), ref)


def test_correlation_observation_consistency():
    _, ref = _setup()
    with pytest.raises(ConsistencyError):
        CorrelationObservation(np.zeros((4, 5)), 7).correlations(ref)
    bad = np.zeros((4, 21), dtype=complex)
    bad[1, 3] = np.nan
    with pytest.raises(ConsistencyError):
        CorrelationObservation(bad, 7).correlations(ref)


def test_csi_estimation():
    h = np.array([1 + 1j, 0.5, -2j, 3.0])
    assert np.array_equal(estimate_csi_reference(np.tile(h, (4, 1)), 4), h)
    assert np.array_equal(estimate_csi_reference(h[None], 1), h)
    rng = np.random.default_rng(3)
    sigma2 = 0.2
    noise = math.sqrt(sigma2 / 2) * (rng.standard_normal((20000, 4, 4)) + 1j * rng.standard_normal((20000, 4, 4)))
    est = np.array([estimate_csi_reference(h + w, 4) for w in noise[:4000]])
    assert np.var(est - h, axis=0).mean() == pytest.approx(sigma2 / 4, rel=5e-2)
    with pytest.raises(InvalidArgumentError):
        estimate_csi_reference(np.tile(h, (2, 1)), 4)


def test_phase_feature_examples():
    h = np.array([2.0, 0.3, 7.0, 1.1, 0.01])
    np.testing.assert_allclose(phase_feature(h).values, np.ones(4) / 2.0)
    g = np.random.default_rng(0).standard_normal(5) + 1j * np.random.default_rng(1).standard_normal(5)
    for c in (3.0, -1j, 0.2 + 5j):
        np.testing.assert_allclose(phase_feature(c * g).values, phase_feature(g).values, atol=1e-14)
    with pytest.raises(DegenerateReferenceError):
        phase_feature(np.array([0.0, 1.0, 1.0]))


def test_phase_feature_under_pilot_noise():
    rng = np.random.default_rng(12)
    h = np.exp(1j * rng.uniform(0, 2 * math.pi, 5))
    sigma2 = 10 ** (-20 / 10)
    true = phase_feature(h).values
    scores = []
    for _ in range(500):
        w = math.sqrt(sigma2 / 2) * (rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5)))
        f = estimate_phase_feature(h + w, 4).values
        scores.append(abs(np.vdot(true, f)))
    assert np.mean(scores) >= 0.99


def test_ssk_examples():
    rng = np.random.default_rng(6)
    h = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
    ref = CsiReference(h)
    assert ssk_detect(h[2], ref) == 2
    theta = rng.uniform(0, 2 * math.pi, 2000)
    errs = sum(ssk_detect(h[2] * np.exp(1j * t), ref) != 2 for t in theta)
    assert errs / 2000 > 0.1


def test_feature_detector_examples():
    rng = np.random.default_rng(9)
    h = rng.standard_normal((4, 5)) + 1j * rng.standard_normal((4, 5))
    feats = [phase_feature(x) for x in h]
    for m in range(4):
        assert dsk_detect_feature(h[m], feats).index == m
        assert dsk_detect_feature((0.3 - 2j) * h[m], feats).index == m
        for theta in rng.uniform(0, 2 * math.pi, 20):
            assert dsk_detect_feature(h[m] * np.exp(1j * theta), feats).index == m


def test_degenerate_observation_is_an_erasure():
    feats = np.stack([phase_feature(np.array([1.0, 1.0, 1.0])).values,
                      phase_feature(np.array([1.0, -1.0, 1j])).values])
    y = np.array([[0.0, 1.0, 1.0], [1.0, 1.0, 1.0]])
    dec, bad = feature_decide_batch(y, feats, np.random.default_rng(0))
    assert bad.tolist() == [True, False] and dec[1] == 0
    with pytest.raises(DegenerateReferenceError):
        feature_decide_batch(y, feats)
    out = dsk_detect_feature(y[0], [PhaseFeature(f) for f in feats], np.random.default_rng(0))
    assert out.erasure


def test_ser_at_fourteen_db_and_ssk_ordering():
    from dsksim.scenarios.cell import run_cell_sweep
    from dsksim.scenarios.engine import Sweep
    curve = run_cell_sweep(CircularCellConfig(), Sweep("snr_db", (6.0, 12.0, 14.0)), 20000, 21)
    dsk14, ssk14 = curve.point("dsk", 14.0), curve.point("ssk", 14.0)
    assert dsk14.ci[1] <= 1e-3
    for snr in (12.0, 14.0):
        assert curve.point("ssk", snr).ser <= curve.point("dsk", snr).ser
    # where DSK still makes errors, the SSK advantage is resolved by the intervals
    d6, s6 = curve.point("dsk", 6.0), curve.point("ssk", 6.0)
    assert s6.ci[1] < d6.ci[0]
    assert ssk14.errors <= dsk14.errors
