import json

import numpy as np
import pytest
from scipy import stats

from shelving import analytic
from shelving import montecarlo as mc
from shelving.errors import FitFailure, NoPeriods
from shelving.liouvillian import SystemParams

FAST = SystemParams.from_ratio(gamma3=0.05, a=1.0, rabi=3.0)


def test_deterministic(ref_params):
    a = mc.simulate_trajectory(ref_params, 2e4, 11)
    b = mc.simulate_trajectory(ref_params, 2e4, 11)
    c = mc.simulate_trajectory(ref_params, 2e4, 12)
    assert np.array_equal(a.times, b.times) and np.array_equal(a.channels, b.channels)
    assert not np.array_equal(a.times[:10], c.times[:10])


def test_record_invariants():
    rec = mc.simulate_trajectory(FAST, 5e4, 3)
    assert np.all(np.diff(rec.times) > 0)
    assert rec.times[0] >= 0 and rec.times[-1] <= rec.duration
    # each 32 jump is followed by exactly one 21 jump before anything else
    ch = rec.channels
    i32 = np.flatnonzero(ch == mc.CH32)
    i32 = i32[i32 + 1 < len(ch)]
    assert np.all(ch[i32 + 1] == mc.CH21)
    i21 = np.flatnonzero(ch == mc.CH21)
    assert np.all(ch[i21 - 1] == mc.CH32)


def test_no_drive_no_jumps():
    rec = mc.simulate_trajectory(SystemParams(gamma2=0.01, gamma3=0.01, rabi=0.0), 1e4, 0)
    assert len(rec) == 0


def test_rejects_bad_duration(ref_params):
    with pytest.raises(ValueError):
        mc.simulate_trajectory(ref_params, 0.0, 0)


def test_waiting_time_mean_exact(ref_params):
    """Sampled waiting times average to int |psi(t)|^2 dt (Lyapunov oracle)."""
    from scipy.linalg import solve_continuous_lyapunov
    tab = mc.WaitingTimeTable(ref_params)
    u = 1 - mc.make_rng(3).random(400000)
    w = tab.invert(u, 1e9)
    x = solve_continuous_lyapunov(tab.gen, -np.diag([1.0, 0.0]))
    assert abs(w.mean() - np.trace(x).real) < 3 * w.std() / np.sqrt(len(w))


def test_waiting_time_refined():
    tab = mc.WaitingTimeTable(FAST)
    u = np.array([0.5, 0.1, 1e-3])
    t = tab.invert(u, 1e9)
    # propagate exactly with the matrix exponential
    from scipy.linalg import expm
    norms = [np.sum(np.abs(expm(tab.gen * ti) @ [1, 0]) ** 2) for ti in t]
    assert np.allclose(norms, u, rtol=1e-5)


def test_branching_ratios():
    rec = mc.simulate_trajectory(FAST, 2e5, 5)
    c = np.bincount(rec.channels, minlength=3)
    n = c[0] + c[1]
    q = FAST.gamma3 / (FAST.gamma + FAST.gamma3)
    chi2 = (c[1] - n * q) ** 2 / (n * q) + (c[0] - n * (1 - q)) ** 2 / (n * (1 - q))
    assert chi2 < stats.chi2.ppf(0.997, 1)
    assert abs(c[2] - c[1]) <= 1


def test_synthetic_classification():
    t = np.array([1.0, 5.0, 10.0, 50.0, 52.0, 60.0, 61.0, 100.0])
    ch = np.array([0, 0, 1, 2, 0, 0, 1, 2], dtype=np.int8)
    rec = mc.TrajectoryRecord(t, ch, 200.0, 0)
    bright, dark = mc.classify_periods(rec)
    assert list(dark) == [40.0, 39.0]
    assert list(bright) == [11.0]


def test_bright_without_photon_dropped():
    t = np.array([1.0, 10.0, 50.0, 55.0, 60.0, 70.0, 71.0, 72.0])
    ch = np.array([0, 1, 2, 1, 2, 0, 1, 2], dtype=np.int8)
    bright, dark = mc.classify_periods(mc.TrajectoryRecord(t, ch, 100.0, 0))
    assert list(bright) == [11.0]
    assert len(dark) == 3


def test_no_periods():
    rec = mc.TrajectoryRecord(np.array([1.0, 2.0]), np.array([0, 0], dtype=np.int8), 3.0, 0)
    with pytest.raises(NoPeriods):
        mc.classify_periods(rec)


def test_dark_durations_exponential():
    p = SystemParams.from_ratio(gamma3=0.05, a=2.0, rabi=4.0)
    rec = mc.simulate_trajectory(p, 4e5, 9)
    _, dark = mc.classify_periods(rec)
    assert len(dark) >= 10000
    mean = analytic.tau_dark(p)
    ks = stats.kstest(dark, "expon", args=(0, mean))
    assert ks.statistic < 1.63 / np.sqrt(len(dark))


def test_reference_taus_within_3_sigma(ref_params):
    st = mc.estimate_taus(ref_params, 1e6, 2026)
    assert abs(st.tau_bright_est - analytic.tau_bright(ref_params)) < 3 * st.stderr_bright
    assert abs(st.tau_dark_est - analytic.tau_dark(ref_params)) < 3 * st.stderr_dark
    # periods alternate; bright periods without a photon (~gamma3/gamma of them) are dropped
    assert abs(st.n_dark - st.n_bright) <= 0.01 * st.n_dark


def test_tau_bright_scales_inverse_gamma3():
    p1 = SystemParams.from_ratio(gamma3=0.02, a=0.5, rabi=5.0)
    p2 = SystemParams.from_ratio(gamma3=0.01, a=0.5, rabi=5.0)
    s1 = mc.estimate_taus(p1, 4e5, 1)
    s2 = mc.estimate_taus(p2, 8e5, 2)
    r = s2.tau_bright_est / s1.tau_bright_est
    err = r * np.hypot(s1.stderr_bright / s1.tau_bright_est, s2.stderr_bright / s2.tau_bright_est)
    assert abs(r - 2) < 3 * err


def test_stderr_scales_with_length():
    s1 = mc.estimate_taus(FAST, 5e4, 4)
    s2 = mc.estimate_taus(FAST, 4e5, 4)
    ratio = s1.stderr_dark / s2.stderr_dark
    assert ratio == pytest.approx(np.sqrt(8), rel=0.25)


def test_gap_classifier_runs():
    p = SystemParams.from_ratio(gamma3=0.01, a=0.5, rabi=1.5)
    rec = mc.simulate_trajectory(p, 2e5, 6)
    bright, dark = mc.classify_periods_gap(rec)
    assert len(bright) > 0 and len(dark) > 0


def test_jsonl_round_trip(tmp_path):
    rec = mc.simulate_trajectory(FAST, 2e3, 1)
    path = tmp_path / "r.jsonl"
    mc.write_jsonl(rec, path)
    first = json.loads(path.read_text().splitlines()[0])
    assert set(first) == {"t", "ch"} and first["ch"] in mc.CHANNEL_NAMES
    back = mc.read_jsonl(path, rec.duration)
    assert np.array_equal(back.times, rec.times) and np.array_equal(back.channels, rec.channels)


def test_telegraph_samples_duty_cycle():
    x = mc.telegraph_samples(30.0, 70.0, 2e5, 1.0, mc.make_rng(0))
    assert x.mean() == pytest.approx(0.3, abs=0.02)


@pytest.mark.parametrize("tb,td", [(100.0, 100.0), (40.0, 400.0), (211.1, 333.3)])
def test_psd_hwhm(tb, td):
    expected = 1 / tb + 1 / td
    duration = 32 * 100 / expected
    h = mc.telegraph_psd_hwhm(tb, td, duration, 16, 3)
    assert h == pytest.approx(expected, rel=0.10)


def test_psd_symmetric():
    a = mc.telegraph_psd_hwhm(50.0, 150.0, 32 * 100 * 37.5, 16, 4)
    b = mc.telegraph_psd_hwhm(150.0, 50.0, 32 * 100 * 37.5, 16, 4)
    assert a == pytest.approx(b, rel=0.10)


def test_psd_fit_failure_on_short_record():
    with pytest.raises(FitFailure):
        mc.telegraph_psd_hwhm(100.0, 100.0, 32 * 100.0, 1, 0)


def test_psd_rejects_few_segments():
    with pytest.raises(ValueError):
        mc.telegraph_psd(100.0, 100.0, 1e5, 1, 0, n_segments=8)
