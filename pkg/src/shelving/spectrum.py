"""Resonance fluorescence spectrum: elastic weight, incoherent spectrum via
the regression theorem, the two-level Mollow baseline and measurements of
the narrow peak at the laser frequency.

Offsets are ``omega - omega_L`` in units of gamma. Spectra are normalized
so that the elastic intensity plus the integral of the incoherent part is
one.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import numerics
from .errors import DegenerateSystem, NoPeak
from .liouvillian import (
    SystemParams,
    build_liouvillian,
    correlation_seed,
    reduced_two_level,
    steady_state_closed,
    two_level,
)

CSV_HEADER = ("offset", "s_inc", "s_mollow", "s_peak")


@dataclass(frozen=True)
class PeakMetrics:
    """Amplitude above the Mollow baseline, HWHM and relative intensity of
    the narrow peak. Fields a method cannot provide are ``None``."""

    amplitude: float | None
    hwhm: float
    intensity: float | None
    method: str


@dataclass(frozen=True)
class SpectrumCurve:
    offsets: np.ndarray
    values: np.ndarray
    baseline: np.ndarray
    params: SystemParams

    @property
    def peak(self) -> np.ndarray:
        return self.values - self.baseline


def _regression_problem(p: SystemParams):
    """Generator, seed vector and output component for the resolvent."""
    ss = steady_state_closed(p)
    rho33 = ss.rho33.real
    if rho33 <= 0:
        raise DegenerateSystem("no excited population; spectrum undefined")
    b = build_liouvillian(p).b
    seed = correlation_seed(p, ss)
    if p.is_two_level:
        b, seed = reduced_two_level(b, seed)
        return b, seed, 1, rho33
    # <delta sigma3(tau) delta sigma4(0)> is the sigma3 component
    return b, seed, 2, rho33


def elastic_intensity(p: SystemParams) -> float:
    """Relative weight of the coherent delta peak, |rho31|^2 / rho33."""
    ss = steady_state_closed(p)
    if ss.rho33.real <= 0:
        raise DegenerateSystem("rho33 = 0: no scattering")
    return abs(ss.rho31) ** 2 / ss.rho33.real


def incoherent_spectrum(p: SystemParams, offset):
    """Normalized incoherent spectrum at one offset or an array of offsets.

    Each offset costs one 4x4 (3x3 in the two-level branch) complex solve of
    ``(i*offset - B) x = R``.
    """
    b, seed, comp, rho33 = _regression_problem(p)
    w = np.asarray(offset, dtype=float)
    n = b.shape[0]
    m = 1j * w[..., None, None] * np.eye(n) - b
    x = numerics.solve(m, seed)
    s = x[..., comp].real / (math.pi * rho33)
    return float(s) if s.ndim == 0 else s


def mollow_baseline(p: SystemParams, offset):
    """Two-level Mollow spectrum with the same rabi, detuning and gamma."""
    return incoherent_spectrum(two_level(p), offset)


def tail_integral(p: SystemParams, half_width: float, terms: int = 4) -> float:
    """Integral of the incoherent spectrum over ``|offset| > half_width``.

    Expands ``(i w - B)^-1 = sum_k B^k / (i w)^(k+1)``; terms odd in ``w``
    cancel between the two tails, the rest integrate in closed form. The
    ``1/w^2`` coefficient vanishes identically, so the leading term is
    ``1/w^4``.
    """
    b, seed, comp, rho33 = _regression_problem(p)
    total = 0.0
    v = seed
    for k in range(1, 2 * terms + 1):
        v = b @ v
        if k % 2 == 1:
            coeff = (v[comp] / (1j) ** (k + 1)).real / (math.pi * rho33)
            total += 2 * coeff / (k * half_width ** k)
    return total


def _panel_points(p: SystemParams, half_width: float) -> np.ndarray:
    pts = {-half_width, 0.0, half_width}
    wt = p.generalized_rabi
    for c in (wt, 0.5 * wt, 2 * wt):
        if 0 < c < half_width:
            pts.update((c, -c))
    if p.gamma3 > 0 and not p.is_two_level:
        for k in (1.0, 10.0, 100.0):
            c = k * p.gamma3
            if c < half_width:
                pts.update((c, -c))
    return np.array(sorted(pts))


def integrated_incoherent(p: SystemParams, rtol: float = 1e-6) -> float:
    """Integral of the incoherent spectrum over all offsets.

    Quadrature over ``[-8 W, 8 W]`` with ``W = max(generalized rabi, gamma)``,
    plus the asymptotic tails beyond.
    """
    half = 8.0 * max(p.generalized_rabi, p.gamma)
    core = numerics.adaptive_simpson(
        lambda x: incoherent_spectrum(p, x), _panel_points(p, half), rtol=rtol, atol=1e-12)
    return core + tail_integral(p, half)


def total_intensity(p: SystemParams) -> float:
    """Elastic plus incoherent intensity; one for a consistent model."""
    return elastic_intensity(p) + integrated_incoherent(p)


def peak_width_eigenvalue(p: SystemParams) -> float:
    """Narrow-peak HWHM as minus the real part of the slowest eigenvalue of B."""
    ev = numerics.eigenvalues(build_liouvillian(p).b).values
    slow = ev[np.argmin(np.abs(ev.real))]
    return -slow.real


def _peak_difference(p: SystemParams):
    full, base = p, two_level(p)
    return lambda x: incoherent_spectrum(full, x) - incoherent_spectrum(base, x)


def peak_metrics_numeric(p: SystemParams) -> PeakMetrics:
    """Measure the narrow peak on the difference full minus Mollow spectrum.

    The HWHM is bracketed from ``gamma3/10`` by doubling and refined by
    bisection; the intensity integrates the difference over 50 HWHM on each
    side and adds the Lorentzian tail beyond.
    """
    if p.gamma2 <= 0 or p.gamma3 <= 0:
        raise ValueError("numeric peak metrics need gamma2, gamma3 > 0")
    diff = _peak_difference(p)
    amplitude = float(diff(0.0))
    if amplitude <= 1e-9:
        raise NoPeak(f"no narrow peak (amplitude {amplitude:.3g})")
    half = 0.5 * amplitude
    lo, hi = 0.0, p.gamma3 / 10
    while diff(hi) > half:
        lo, hi = hi, 2 * hi
        if hi > 100 * p.gamma:
            raise NoPeak("half maximum not reached")
    hwhm = numerics.bisect(lambda x: diff(x) - half, lo, hi, rtol=1e-6)
    w = 50 * hwhm
    pts = hwhm * np.array([-50, -10, -3, -1, 0, 1, 3, 10, 50], dtype=float)
    core = numerics.adaptive_simpson(diff, pts, rtol=1e-6, atol=1e-12)
    tail = math.pi * amplitude * hwhm * (1 - 2 / math.pi * math.atan(w / hwhm))
    return PeakMetrics(amplitude=amplitude, hwhm=hwhm, intensity=core + tail, method="numeric")


def spectrum_grid(p: SystemParams, n_coarse: int = 601, n_fine: int = 120,
                  span: float = 1.5) -> np.ndarray:
    """Coarse grid over ``span`` generalized Rabi frequencies plus a
    logarithmic refinement within 100 gamma3 of the laser frequency."""
    if n_coarse < 2:
        raise ValueError("grid needs at least two coarse points")
    half = span * max(p.generalized_rabi, p.gamma)
    parts = [np.linspace(-half, half, n_coarse)]
    if n_fine > 0 and p.gamma3 > 0 and not p.is_two_level:
        fine = np.geomspace(1e-3 * p.gamma3, 100 * p.gamma3, n_fine)
        parts += [fine, -fine, np.zeros(1)]
    return np.unique(np.concatenate(parts))


def spectrum_curve(p: SystemParams, offsets=None, **grid) -> SpectrumCurve:
    if offsets is None:
        offsets = spectrum_grid(p, **grid)
    offsets = np.asarray(offsets, dtype=float)
    if offsets.size == 0:
        raise ValueError("empty frequency grid")
    if np.any(np.diff(offsets) <= 0):
        raise ValueError("offsets must be strictly ascending")
    return SpectrumCurve(offsets, incoherent_spectrum(p, offsets), mollow_baseline(p, offsets), p)


def write_curve_csv(curve: SpectrumCurve, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for row in zip(curve.offsets, curve.values, curve.baseline, curve.peak):
            w.writerow([f"{v:.17g}" for v in row])


def read_curve_csv(path) -> dict[str, np.ndarray]:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"unexpected header {rows[0]}")
    data = np.array([[float(v) for v in r] for r in rows[1:]]).reshape(-1, len(CSV_HEADER))
    return {name: data[:, i] for i, name in enumerate(CSV_HEADER)}
