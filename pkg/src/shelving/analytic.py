"""Closed-form descriptions of the narrow peak.

Three families:

* secular limit (large Rabi frequency at the optimal detuning),
* random telegraph model (bright/dark periods, exact intensity),
* period statistics (mean bright/dark durations and time fractions).

Every formula is in units of gamma with ``a = gamma2 / gamma3``. Validity
regimes are listed in ``REGIMES``; they are documentation, never enforced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfiniteBrightPeriod, InfiniteDarkPeriod, NoSaddle
from .liouvillian import SystemParams, two_level_rho33
from .spectrum import PeakMetrics, elastic_intensity

REGIMES = {
    "delta_max": "real only if (1 + 2a) rabi^2 >= 8 a gamma^2",
    "peak_amplitude_formula": "gamma2, gamma3 << gamma",
    "secular_peak": "rabi >> gamma, detuning = delta_max, gamma2, gamma3 << gamma",
    "telegraph_intensity_exact": "any parameters (telegraph model assumed)",
    "telegraph_intensity_approx": "gamma2, gamma3 << gamma",
    "telegraph_width": "gamma2, gamma3 << gamma",
    "tau_bright": "gamma3 << gamma (quasi-stationary two-level population)",
    "tau_dark": "exact",
    "bright_dark_fractions": "gamma2, gamma3 << gamma",
}


@dataclass(frozen=True)
class TelegraphPrediction:
    tau_bright: float
    tau_dark: float
    width: float
    intensity_exact: float
    intensity_approx: float
    alpha: float
    beta: float
    regime: str = REGIMES["telegraph_width"]


def _k(p: SystemParams) -> float:
    return 2 * p.detuning ** 2 + 2 * p.gamma ** 2 + p.rabi ** 2


def delta_max(p: SystemParams) -> float:
    """Detuning along the ridge of maximal narrow-peak intensity.

    At fixed Rabi frequency the intensity here is within about 1% of its
    maximum over the detuning; the amplitude itself keeps growing beyond it.
    """
    a, g, w = p.a, p.gamma, p.rabi
    num = (1 + 2 * a) * w * w - 8 * a * g * g
    if a <= 0 or num < 0:
        raise NoSaddle("no real optimal detuning for these parameters")
    return math.sqrt(num / (8 * a))


def peak_amplitude_formula(p: SystemParams) -> float:
    a, g, w, d = p.a, p.gamma, p.rabi, p.detuning
    den = (w * w + 2 * a * (2 * d * d + 2 * g * g + w * w)) ** 2 * math.pi * p.gamma3
    return 2 * (d * d + g * g) * w * w / den


def secular_width(a: float, gamma3: float) -> float:
    return 6 * a * (1 + 2 * a) / (1 + 6 * a) * gamma3


def secular_amplitude(a: float, gamma3: float) -> float:
    return 1 / (9 * a * (1 + 2 * a) * math.pi * gamma3)


def secular_intensity(a: float) -> float:
    return 2 / (3 * (1 + 6 * a))


def secular_peak(p: SystemParams) -> PeakMetrics:
    """Width, amplitude and intensity in the secular limit.

    The intensity is reported as ``pi * width * amplitude`` of the
    Lorentzian; it reduces to ``2 / (3 (1 + 6a))``.
    """
    a, g3 = p.a, p.gamma3
    width = secular_width(a, g3)
    amp = secular_amplitude(a, g3)
    return PeakMetrics(amplitude=amp, hwhm=width, intensity=math.pi * width * amp, method="secular")


def secular_profile(p: SystemParams, offset):
    """Lorentzian narrow-peak contribution in the secular limit."""
    a, g3 = p.a, p.gamma3
    width = secular_width(a, g3)
    return secular_intensity(a) / math.pi * width / (offset ** 2 + width ** 2)


def telegraph_intensity_exact(p: SystemParams) -> float:
    """Narrow-peak intensity as the elastic weight lost to shelving:
    two-level elastic intensity minus three-level elastic intensity."""
    a, g, g3, w, d = p.a, p.gamma, p.gamma3, p.rabi, p.detuning
    k = _k(p)
    num = 2 * (d * d + g * g - 4 * a * g * g3 - 2 * a * g3 * g3) * w * w
    return num / (k * (w * w + 2 * a * (k + 4 * g * g3 + 2 * g3 * g3)))


def telegraph_intensity_approx(p: SystemParams) -> float:
    """Zeroth order of ``telegraph_intensity_exact`` in gamma3/gamma."""
    a, g, w, d = p.a, p.gamma, p.rabi, p.detuning
    k = _k(p)
    return 2 * (d * d + g * g) * w * w / (k * (w * w + 2 * a * k))


def telegraph_width(p: SystemParams) -> float:
    """Narrow-peak HWHM ``(rabi^2 + 2aK)/K * gamma3``; equals
    ``1/tau_bright + 1/tau_dark``."""
    k = _k(p)
    return (p.rabi ** 2 + 2 * p.a * k) / k * p.gamma3


def tau_dark(p: SystemParams) -> float:
    if p.gamma2 <= 0:
        raise InfiniteDarkPeriod("gamma2 = 0: the shelving level never decays")
    return 1 / (2 * p.gamma2)


def tau_bright(p: SystemParams) -> float:
    rate = two_level_rho33(p) * 2 * p.gamma3
    if rate <= 0:
        raise InfiniteBrightPeriod("no shelving (gamma3 = 0 or rabi = 0)")
    return 1 / rate


def bright_dark_fractions(p: SystemParams) -> tuple[float, float]:
    """Fractions of time spent bright (alpha) and dark (beta)."""
    tb, td = tau_bright(p), tau_dark(p)
    return tb / (tb + td), td / (tb + td)


def fractions_from_intensities(p: SystemParams) -> tuple[float, float]:
    """alpha and beta from the elastic and narrow-peak intensities.

    Agrees with ``bright_dark_fractions`` to zeroth order in gamma3/gamma.
    """
    coh = elastic_intensity(p)
    peak = telegraph_intensity_approx(p)
    return coh / (peak + coh), peak / (peak + coh)


def telegraph_prediction(p: SystemParams) -> TelegraphPrediction:
    tb, td = tau_bright(p), tau_dark(p)
    alpha, beta = bright_dark_fractions(p)
    return TelegraphPrediction(
        tau_bright=tb,
        tau_dark=td,
        width=1 / tb + 1 / td,
        intensity_exact=telegraph_intensity_exact(p),
        intensity_approx=telegraph_intensity_approx(p),
        alpha=alpha,
        beta=beta,
    )


def telegraph_peak(p: SystemParams) -> PeakMetrics:
    return PeakMetrics(
        amplitude=peak_amplitude_formula(p),
        hwhm=telegraph_width(p),
        intensity=telegraph_intensity_exact(p),
        method="telegraph",
    )
