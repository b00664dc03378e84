"""Acceptance suite: the eleven reference checks behind ``shelving validate``.

Each criterion returns a ``Result`` with a pass flag and a short detail
string. Reference numbers are quoted with the tolerance they are held to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic, montecarlo, spectrum, springmodel
from .liouvillian import SystemParams, two_level

REFERENCE = dict(gamma3=0.005, a=0.3, rabi=6.0)
MC_DURATION = 1e6
MC_SEED = 2026


@dataclass(frozen=True)
class Result:
    key: int
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Criterion:
    key: int
    name: str
    run: Callable[[], tuple[bool, str]]


def _close(x, ref, rel):
    return abs(x / ref - 1) <= rel


def _random_params(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield SystemParams.from_ratio(
            gamma3=rng.uniform(1e-3, 0.05), a=rng.uniform(0.05, 2.0),
            rabi=rng.uniform(0.5, 10.0), detuning=rng.uniform(-5.0, 5.0))


def _reference_pair():
    p0 = SystemParams.from_ratio(**REFERENCE)
    pm = p0.with_(detuning=analytic.delta_max(p0))
    return spectrum.peak_metrics_numeric(p0), spectrum.peak_metrics_numeric(pm), p0, pm


def c1_amplitude():
    m0, mm, _, _ = _reference_pair()
    r = mm.amplitude / m0.amplitude
    ok = _close(r, 11.1, 0.10) and _close(mm.amplitude, 14.8, 0.05) and _close(m0.amplitude, 1.3, 0.05)
    return ok, f"A(dmax)={mm.amplitude:.4g} A(0)={m0.amplitude:.4g} ratio={r:.4g}"


def c2_width():
    m0, mm, p0, pm = _reference_pair()
    r = mm.hwhm / m0.hwhm
    e0, em = spectrum.peak_width_eigenvalue(p0), spectrum.peak_width_eigenvalue(pm)
    ok = (_close(mm.hwhm, 0.0051, 0.05) and _close(m0.hwhm, 0.0077, 0.05) and _close(r, 0.7, 0.05)
          and _close(e0, m0.hwhm, 0.05) and _close(em, mm.hwhm, 0.05))
    return ok, (f"G(dmax)={mm.hwhm:.5g} G(0)={m0.hwhm:.5g} ratio={r:.4g} "
                f"eig={em:.5g}/{e0:.5g}")


def c3_intensity():
    m0, mm, _, _ = _reference_pair()
    r = mm.intensity / m0.intensity
    consistent = all(_close(m.intensity, math.pi * m.amplitude * m.hwhm, 0.05) for m in (m0, mm))
    return _close(r, 7.4, 0.10) and consistent, (
        f"I(dmax)={mm.intensity:.4g} I(0)={m0.intensity:.4g} ratio={r:.4g}")


def c4_telegraph_identity():
    worst = 0.0
    for p in _random_params(50, 4):
        diff = spectrum.elastic_intensity(two_level(p)) - spectrum.elastic_intensity(p)
        worst = max(worst, abs(analytic.telegraph_intensity_exact(p) - diff))
    return worst <= 1e-12, f"max |difference| = {worst:.2e}"


def _secular_point(a):
    p = SystemParams.from_ratio(gamma3=1e-3, a=a, rabi=100.0)
    return p.with_(detuning=analytic.delta_max(p))


def c5_secular_intensity():
    a0 = 1 / (2 * math.sqrt(3))
    i0 = spectrum.peak_metrics_numeric(_secular_point(a0)).intensity
    ok = _close(i0, 0.244, 0.03)
    parts = [f"I(a*)={i0:.4g}"]
    for a in (0.1, 0.3, 1.0):
        i = spectrum.peak_metrics_numeric(_secular_point(a)).intensity
        ok &= _close(i, analytic.secular_intensity(a), 0.03)
        parts.append(f"I({a})={i:.4g}/{analytic.secular_intensity(a):.4g}")
    return ok, " ".join(parts)


def c6_width_formulas():
    worst = 0.0
    for g3 in (0.005, 0.001):
        for a in (0.1, 0.3, 1.0):
            for w in (4.0, 7.0, 10.0):
                p = SystemParams.from_ratio(gamma3=g3, a=a, rabi=w)
                for d in (0.0, analytic.delta_max(p)):
                    q = p.with_(detuning=d)
                    h = spectrum.peak_metrics_numeric(q).hwhm
                    worst = max(worst, abs(h / analytic.telegraph_width(q) - 1))
    worst_sec = 0.0
    for a in (1 / (2 * math.sqrt(3)), 0.1, 0.3, 1.0):
        h = spectrum.peak_metrics_numeric(_secular_point(a)).hwhm
        worst_sec = max(worst_sec, abs(h / analytic.secular_width(a, 1e-3) - 1))
    return worst <= 0.03 and worst_sec <= 0.03, (
        f"telegraph width max rel err {worst:.2e}, secular {worst_sec:.2e}")


def c7_taus():
    p = SystemParams.from_ratio(**REFERENCE)
    st = montecarlo.estimate_taus(p, MC_DURATION, MC_SEED)
    tb, td = analytic.tau_bright(p), analytic.tau_dark(p)
    zb = (st.tau_bright_est - tb) / st.stderr_bright
    zd = (st.tau_dark_est - td) / st.stderr_dark
    width = 1 / st.tau_bright_est + 1 / st.tau_dark_est
    eig = spectrum.peak_width_eigenvalue(p)
    ok = abs(zb) <= 3 and abs(zd) <= 3 and _close(width, eig, 0.05)
    return ok, (f"tauB={st.tau_bright_est:.1f}+-{st.stderr_bright:.1f} ({tb:.1f}) "
                f"tauD={st.tau_dark_est:.1f}+-{st.stderr_dark:.1f} ({td:.1f}) "
                f"width={width:.5g} eig={eig:.5g}")


def c8_psd():
    h = montecarlo.telegraph_psd_hwhm(211.1, 333.3, duration=640000.0, n_trajectories=16, seed=8)
    return _close(h, 0.00774, 0.10), f"HWHM={h:.5g} (0.00774)"


def c9_spring():
    colsum = 0.0
    identity = 0.0
    worst_eig = 0.0
    g3 = 1e-4
    for a in (0.1, 0.3, 1.0):
        for w, d in ((6.0, 0.0), (8.0, 2.0), (10.0, 5.0)):
            p = SystemParams.from_ratio(gamma3=g3, a=a, rabi=w, detuning=d)
            colsum = max(colsum, float(np.max(np.abs(springmodel.secular_matrix(p).sum(axis=0)))))
            _, gc = springmodel.weighted_sums(p)
            identity = max(identity, abs(gc - springmodel.narrow_width_closed(p)))
            ms = springmodel.modes(p)
            gb, gcw, _ = springmodel.mode_widths_weighted(p)
            worst_eig = max(worst_eig, abs(-ms.b.eigenvalue.real / gb - 1),
                            abs(-ms.c.eigenvalue.real / gcw - 1))
    ok = colsum <= 1e-13 and identity <= 1e-12 and worst_eig <= 5 * g3
    return ok, f"col sums {colsum:.1e}, closing identity {identity:.1e}, eig rel err {worst_eig:.1e}"


def c10_sum_rule():
    worst = 0.0
    for p in _random_params(20, 10):
        worst = max(worst, abs(spectrum.total_intensity(p) - 1))
    return worst <= 1e-3, f"max |total - 1| = {worst:.2e}"


def c11_trends():
    notes = []
    # weaker shelving coupling: taller, narrower peak (rabi 8, delta 0)
    ms = [spectrum.peak_metrics_numeric(SystemParams.from_ratio(gamma3=g, a=0.3, rabi=8.0))
          for g in (0.05, 0.01, 0.005, 0.001)]
    amps, widths = [m.amplitude for m in ms], [m.hwhm for m in ms]
    coupling = all(np.diff(amps) > 0) and all(np.diff(widths) < 0)
    notes.append(f"gamma3 trend={'ok' if coupling else 'FAIL'}")
    # stronger drive at zero detuning: the peak shrinks
    amps = [spectrum.peak_metrics_numeric(SystemParams.from_ratio(gamma3=0.01, a=0.3, rabi=w)).amplitude
            for w in (4.0, 6.0, 8.0, 10.0)]
    drive = all(np.diff(amps) < 0)
    notes.append(f"rabi trend={'ok' if drive else 'FAIL'}")
    # faster de-shelving: wider, lower peak
    avals = (0.01, 0.1, 0.3, 1.0)
    ps = [SystemParams.from_ratio(gamma3=0.01, a=a, rabi=8.0) for a in avals]
    ms = [spectrum.peak_metrics_numeric(p) for p in ps]
    ratio = all(np.diff([m.hwhm for m in ms]) > 0) and all(np.diff([m.amplitude for m in ms]) < 0)
    notes.append(f"a trend={'ok' if ratio else 'FAIL'}")
    # away from the narrow peak the spectra for different a coincide
    off = np.array([-10.0, -8.0, -4.0, -1.0, 1.0, 4.0, 8.0, 10.0])
    curves = np.array([spectrum.incoherent_spectrum(p, off) for p in ps])
    spread = float(np.max(np.ptp(curves, axis=0) / np.mean(curves, axis=0)))
    baseline = spread < 0.05
    notes.append(f"baseline spread over a={spread:.2e}")
    return coupling and drive and ratio and baseline, " ".join(notes)


CRITERIA = [
    Criterion(1, "amplitude ratio", c1_amplitude),
    Criterion(2, "width ratio", c2_width),
    Criterion(3, "intensity ratio", c3_intensity),
    Criterion(4, "exact telegraph identity", c4_telegraph_identity),
    Criterion(5, "secular intensity", c5_secular_intensity),
    Criterion(6, "width formulas", c6_width_formulas),
    Criterion(7, "bright/dark durations", c7_taus),
    Criterion(8, "telegraph PSD closure", c8_psd),
    Criterion(9, "spring model", c9_spring),
    Criterion(10, "sum rule", c10_sum_rule),
    Criterion(11, "qualitative trends", c11_trends),
]


def run_criterion(c: Criterion) -> Result:
    try:
        ok, detail = c.run()
    except Exception as exc:  # a crash is a failure, reported not raised
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return Result(c.key, c.name, bool(ok), detail)


def run_all(keys=None) -> list[Result]:
    chosen = [c for c in CRITERIA if keys is None or c.key in keys]
    return [run_criterion(c) for c in chosen]


def format_row(r: Result) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.key:2d} {r.name}: {r.detail}"
