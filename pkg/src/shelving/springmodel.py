"""Dressed-state secular dynamics and its mechanical spring analogue.

In the secular limit the central-frequency populations of the dressed
states |+>, |-> and the shelving level |2> obey ``d/dt rho = M rho``.
Squaring gives ``d^2/dt^2 rho = F rho`` with ``F = M @ M``, the equation of
motion of three masses coupled by three springs. Its modes are

* (a) uniform motion, zero width: the elastic peak,
* (b) + against -, width O(gamma): the central Mollow peak,
* (c) + and - against 2, width O(gamma3): the narrow peak.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import AmbiguousModes, DegenerateDressing
from .liouvillian import SystemParams

# Normalization of the mode weights: the largest weight is one.
ALPHA_B = 2.0
ALPHA_C = 2.0
SEPARATION = 10.0


@dataclass(frozen=True)
class DressedAngle:
    theta: float
    sin_t: float
    cos_t: float

    @property
    def cos4(self) -> float:
        """cos(4 theta) = 1 - 8 sin^2 cos^2."""
        return 1 - 8 * (self.sin_t * self.cos_t) ** 2


@dataclass(frozen=True)
class SpringSystem:
    masses: tuple[float, float, float]  # m_plus, m_minus, m_2
    constants: tuple[float, float, float]  # D1 (+-), D2 (+2), D3 (-2)
    f: np.ndarray


@dataclass(frozen=True)
class Mode:
    eigenvalue: complex
    naive_width: float
    weighted_width: float
    weights: tuple[float, float, float]  # (w+, w-, w2) from the eigenvector


@dataclass(frozen=True)
class ModeSet:
    a: Mode
    b: Mode
    c: Mode


def dressed_angle(p: SystemParams) -> DressedAngle:
    """Mixing angle of the dressed states
    ``|+> = sin|3> + cos|1>``, ``|-> = cos|3> - sin|1>``.

    Uses ``sin^2 = (W + detuning) / (2 W)`` and ``cos^2 = (W - detuning) / (2 W)``,
    ``W`` the generalized Rabi frequency, which equal the usual closed form.
    The smaller of the two is rewritten as ``rabi^2 / (2 W (W +- detuning))``
    so nothing cancels when the detuning dominates.
    """
    wt = p.generalized_rabi
    if wt == 0:
        raise DegenerateDressing("rabi = detuning = 0: dressed states undefined")
    small = p.rabi ** 2 / (2 * wt * (wt + abs(p.detuning)))
    large = (wt + abs(p.detuning)) / (2 * wt)
    s2, c2 = (large, small) if p.detuning >= 0 else (small, large)
    s2, c2 = min(s2, 1.0), min(c2, 1.0)
    s, c = math.sqrt(s2), math.sqrt(c2)
    return DressedAngle(theta=math.atan2(s, c), sin_t=s, cos_t=c)


def transition_rates(p: SystemParams) -> dict[str, float]:
    """Rates between dressed states, keyed ``"ij"`` for ``i -> j``."""
    ang = dressed_angle(p)
    s2, c2 = ang.sin_t ** 2, ang.cos_t ** 2
    g, g2, g3 = p.gamma, p.gamma2, p.gamma3
    return {
        "+-": 2 * g * s2 * s2,
        "-+": 2 * g * c2 * c2,
        "+2": 2 * g3 * s2,
        "-2": 2 * g3 * c2,
        "2+": 2 * g2 * c2,
        "2-": 2 * g2 * s2,
    }


def secular_matrix(p: SystemParams) -> np.ndarray:
    """Rate matrix for ``(rho_++, rho_--, rho_22)``; columns sum to zero."""
    r = transition_rates(p)
    return np.array([
        [-r["+2"] - r["+-"], r["-+"], r["2+"]],
        [r["+-"], -r["-2"] - r["-+"], r["2-"]],
        [r["+2"], r["-2"], -r["2+"] - r["2-"]],
    ])


def spring_system(p: SystemParams) -> SpringSystem:
    if p.gamma2 <= 0 or p.gamma3 <= 0:
        raise ValueError("spring system needs gamma2, gamma3 > 0")
    ang = dressed_angle(p)
    s, c, th = ang.sin_t, ang.cos_t, ang.theta
    g, g2, g3 = p.gamma, p.gamma2, p.gamma3
    m_p = s ** -4
    m_m = c ** -4
    m_2 = g3 / g2 / (s * s * c * c)
    cos2, cos4 = math.cos(2 * th), math.cos(4 * th)
    d1 = 3 * g * g + 4 * g * g3 - 4 * g2 * g3 + g * g * cos4
    d2 = g3 / (s * s) * (g + 4 * g2 + 2 * g3 - 2 * (g + g3) * cos2 + g * cos4)
    d3 = g3 / (c * c) * (g + 4 * g2 + 2 * g3 + 2 * (g + g3) * cos2 + g * cos4)
    f = np.array([
        [(d1 + d2) / m_p, -d1 / m_m, -d2 / m_2],
        [-d1 / m_p, (d1 + d3) / m_m, -d3 / m_2],
        [-d2 / m_p, -d3 / m_m, (d2 + d3) / m_2],
    ])
    return SpringSystem(masses=(m_p, m_m, m_2), constants=(d1, d2, d3), f=f)


def mode_widths_naive(p: SystemParams) -> tuple[float, float, float]:
    """Widths as plain sums of the rates each mode uses."""
    c4 = dressed_angle(p).cos4
    return 0.0, (3 + c4) / 2 * p.gamma, 2 * (p.a + 1) * p.gamma3


def _correction(c4: float) -> float:
    return (5 + 3 * c4) / (3 + c4)


def mode_weights(p: SystemParams) -> dict[str, tuple[float, float, float]]:
    """Dressed-state weights (w+, w-, w2) of modes b (first order in
    gamma3/gamma) and c (zeroth order)."""
    sp = spring_system(p)
    m_p, m_m, _ = sp.masses
    eps = (m_m - m_p) / (m_p + m_m) * p.gamma3 / p.gamma
    hb, hc = ALPHA_B / 2, ALPHA_C / 2
    return {
        "b": (hb, hb * (1 - eps), hb * eps),
        "c": (hc * m_p / (m_p + m_m), hc * m_m / (m_p + m_m), hc),
    }


def weighted_sums(p: SystemParams) -> tuple[float, float]:
    """Mode b and c widths as weight-times-rate sums, before truncation."""
    r = transition_rates(p)
    wb, wc = mode_weights(p)["b"], mode_weights(p)["c"]
    gb = wb[0] * (r["+-"] + r["+2"]) + wb[1] * r["-+"] + wb[2] * r["2+"]
    gc = wc[0] * r["+2"] + wc[1] * r["-2"] + wc[2] * (r["2+"] + r["2-"])
    return gb, gc


def mode_widths_weighted(p: SystemParams):
    """First-order widths of modes b and c, and the weights behind them.

    The weighted sums for mode c equal the closed form exactly; for mode b
    they differ at second order in gamma3/gamma, which is dropped.
    """
    c4 = dressed_angle(p).cos4
    corr = _correction(c4) * p.gamma3
    gb = (3 + c4) / 2 * p.gamma + corr
    gc = 2 * (p.a + 1) * p.gamma3 - corr
    return gb, gc, mode_weights(p)


def narrow_width_closed(p: SystemParams) -> float:
    """Mode-c width written with the Rabi frequency and detuning."""
    w2, d2 = p.rabi ** 2, p.detuning ** 2
    return (w2 + 2 * p.a * (2 * d2 + w2)) / (2 * d2 + w2) * p.gamma3


def modes(p: SystemParams) -> ModeSet:
    """Eigenmodes of the secular matrix, identified by decay rate.

    Raises ``AmbiguousModes`` unless the Mollow mode decays at least ten
    times faster than the narrow-peak mode.
    """
    m = secular_matrix(p)
    eig = numerics.eigenvalues(m, vectors=True)
    order = np.argsort(np.abs(eig.values.real))
    ia, ic, ib = order
    if abs(eig.values[ib].real) < SEPARATION * abs(eig.values[ic].real):
        raise AmbiguousModes("modes b and c are not separated by a factor 10")
    _, nb, nc = mode_widths_naive(p)
    gb, gc, _ = mode_widths_weighted(p)

    def build(i, naive, weighted):
        v = np.abs(eig.vectors[i])
        w = tuple(float(x) for x in v / v.max())
        return Mode(eigenvalue=complex(eig.values[i]), naive_width=naive,
                    weighted_width=weighted, weights=w)

    return ModeSet(a=build(ia, 0.0, 0.0), b=build(ib, nb, gb), c=build(ic, nc, gc))
