"""Three-level system with a shelving level: parameters, Bloch equations,
steady state and the correlation seed for the regression theorem.

Levels: |1> ground, |3> excited (driven 1 <-> 3 by the laser), |2> the
metastable shelving level. Total decay widths are 2*gamma (3 -> 1),
2*gamma3 (3 -> 2) and 2*gamma2 (2 -> 1). All rates and frequencies are in
units of gamma, times in units of 1/gamma.

The dynamical vector is ``(rho33, rho11, rho31, rho13)`` with
``<sigma> = rho`` for ``sigma = (|3><3|, |1><1|, |3><1|, |1><3|)``;
``rho22 = 1 - rho33 - rho11`` is eliminated. The coherences rho32 and rho21
decouple and relax to zero, so they are not represented.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass, replace

import numpy as np

from . import numerics
from .errors import DegenerateSystem

# Mutation hooks for the validation suite. Never set outside tests.
_FAULTS: set[str] = set()


@contextlib.contextmanager
def inject_fault(name: str):
    """Temporarily corrupt the generator (``"b-sign-flip"``) to check that
    the acceptance criteria are able to fail."""
    if name not in {"b-sign-flip"}:
        raise ValueError(f"unknown fault {name!r}")
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


@dataclass(frozen=True)
class SystemParams:
    """One physical configuration.

    ``gamma``, ``gamma2`` and ``gamma3`` are half the total decay widths of
    the transitions 3->1, 2->1 and 3->2; ``rabi`` is the Rabi frequency and
    ``detuning`` is laser minus atomic frequency.
    """

    gamma: float = 1.0
    gamma2: float = 0.0
    gamma3: float = 0.0
    rabi: float = 0.0
    detuning: float = 0.0
    two_level_branch: bool = False

    def __post_init__(self):
        for name in ("gamma", "gamma2", "gamma3", "rabi", "detuning"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.gamma2 < 0 or self.gamma3 < 0:
            raise ValueError("gamma2 and gamma3 must be non-negative")
        if self.rabi < 0:
            raise ValueError("rabi must be non-negative")

    @classmethod
    def from_ratio(cls, *, gamma3: float, a: float, rabi: float,
                   detuning: float = 0.0, gamma: float = 1.0) -> SystemParams:
        """Build parameters from the de-shelving ratio ``a = gamma2/gamma3``."""
        return cls(gamma=gamma, gamma2=a * gamma3, gamma3=gamma3, rabi=rabi, detuning=detuning)

    @property
    def a(self) -> float:
        if self.gamma3 <= 0:
            raise DegenerateSystem("a = gamma2/gamma3 needs gamma3 > 0")
        return self.gamma2 / self.gamma3

    @property
    def is_two_level(self) -> bool:
        return self.two_level_branch or (self.gamma2 == 0 and self.gamma3 == 0)

    @property
    def generalized_rabi(self) -> float:
        return math.hypot(self.rabi, self.detuning)

    def with_(self, **changes) -> SystemParams:
        return replace(self, **changes)


@dataclass(frozen=True)
class BlochVector:
    rho33: complex
    rho11: complex
    rho31: complex
    rho13: complex

    @property
    def rho22(self) -> float:
        return 1.0 - self.rho33.real - self.rho11.real

    def as_array(self) -> np.ndarray:
        return np.array([self.rho33, self.rho11, self.rho31, self.rho13], dtype=complex)

    @classmethod
    def from_array(cls, v) -> BlochVector:
        v = np.asarray(v, dtype=complex)
        return cls(complex(v[0]), complex(v[1]), complex(v[2]), complex(v[3]))

    def check(self, tol: float = 1e-12) -> None:
        """Raise ``ValueError`` if this is not a physical state."""
        if abs(self.rho13 - self.rho31.conjugate()) > tol:
            raise ValueError("rho13 is not the conjugate of rho31")
        if abs(self.rho33.imag) > tol or abs(self.rho11.imag) > tol:
            raise ValueError("populations have imaginary parts")
        if self.rho33.real < -tol or self.rho11.real < -tol or self.rho22 < -tol:
            raise ValueError("negative population")

    def density_matrix(self) -> np.ndarray:
        """3x3 density matrix D in the basis (|1>, |2>, |3>).

        Expectation values follow <|i><j|> = Tr(D |i><j|) = D[j, i], so
        ``rho31 = <|3><1|>`` sits at D[|1>, |3>].
        """
        d = np.zeros((3, 3), dtype=complex)
        d[0, 0] = self.rho11
        d[1, 1] = self.rho22
        d[2, 2] = self.rho33
        d[0, 2] = self.rho31
        d[2, 0] = self.rho13
        return d


@dataclass(frozen=True)
class Liouvillian:
    """``d rho/dt = b @ rho + drive``."""

    b: np.ndarray
    drive: np.ndarray


def build_liouvillian(p: SystemParams) -> Liouvillian:
    g, g2, g3, w, d = p.gamma, p.gamma2, p.gamma3, p.rabi, p.detuning
    if p.two_level_branch:
        g2 = g3 = 0.0
    h = 0.5j * w
    b = np.array([
        [-2 * (g + g3), 0, h, -h],
        [2 * (g - g2), -2 * g2, -h, h],
        [h, -h, -1j * d - g - g3, 0],
        [-h, h, 0, 1j * d - g - g3],
    ], dtype=complex)
    if "b-sign-flip" in _FAULTS:
        b[1, 2] = -b[1, 2]
    return Liouvillian(b=b, drive=np.array([0, 2 * g2, 0, 0], dtype=complex))


def two_level(p: SystemParams) -> SystemParams:
    """The driven two-level reference system (no shelving level)."""
    return replace(p, gamma2=0.0, gamma3=0.0, two_level_branch=True)


def two_level_rho33(p: SystemParams) -> float:
    """Excited population of the two-level system."""
    g, w, d = p.gamma, p.rabi, p.detuning
    return w * w / (2 * (2 * d * d + 2 * g * g + w * w))


def steady_state_closed(p: SystemParams) -> BlochVector:
    """Analytic steady state; two-level formulas when gamma3 vanishes."""
    g, w, d = p.gamma, p.rabi, p.detuning
    if p.is_two_level or p.gamma3 == 0:
        k = 2 * d * d + 2 * g * g + w * w
        rho33 = w * w / (2 * k)
        rho31 = -w * (d + 1j * g) / k
        return BlochVector(complex(rho33), complex(1 - rho33), rho31, rho31.conjugate())
    a, g3 = p.a, p.gamma3
    n = w * w + 2 * a * (2 * d * d + 2 * g * g + 4 * g * g3 + 2 * g3 * g3 + w * w)
    if n == 0:
        raise DegenerateSystem("normalization N vanishes (rabi = 0 and a = 0)")
    rho33 = a * w * w / n
    rho11 = a * (4 * d * d + 4 * g * g + 8 * g * g3 + 4 * g3 * g3 + w * w) / n
    rho31 = -2 * a * w * (d + 1j * (g + g3)) / n
    return BlochVector(complex(rho33), complex(rho11), rho31, rho31.conjugate())


def steady_state_numeric(p: SystemParams) -> BlochVector:
    """Steady state from ``B rho = -I``.

    In the two-level branch the trace constraint replaces the (degenerate)
    second row. With ``gamma2 = 0`` the solution is the fully shelved state
    ``rho22 = 1``.
    """
    lv = build_liouvillian(p)
    if p.is_two_level:
        b = lv.b.copy()
        rhs = -lv.drive.copy()
        b[1] = [1, 1, 0, 0]
        rhs[1] = 1
        return BlochVector.from_array(numerics.solve(b, rhs))
    return BlochVector.from_array(numerics.solve(lv.b, -lv.drive))


def sigma_operators() -> list[np.ndarray]:
    """The four transition operators as 3x3 matrices in basis (|1>,|2>,|3>)."""
    ket = np.eye(3)
    one, three = ket[0], ket[2]
    return [
        np.outer(three, three),
        np.outer(one, one),
        np.outer(three, one),
        np.outer(one, three),
    ]


def correlation_seed(p: SystemParams, ss: BlochVector | None = None) -> np.ndarray:
    """``R = <sigma sigma4> - <sigma><sigma4>`` in the steady state.

    Products: sigma1 sigma4 = 0, sigma2 sigma4 = sigma4, sigma3 sigma4 =
    sigma1, sigma4 sigma4 = 0.
    """
    if ss is None:
        ss = steady_state_closed(p)
    s4 = ss.rho13
    return np.array([
        -ss.rho33 * s4,
        s4 - ss.rho11 * s4,
        ss.rho33 - ss.rho31 * s4,
        -s4 * s4,
    ], dtype=complex)


def reduced_two_level(b: np.ndarray, seed: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Fold the 4-vector problem onto (sigma1, sigma3, sigma4) using
    delta sigma2 = -delta sigma1.

    Only valid when population stays in {|1>, |3>}; removes the zero mode
    that makes ``i w - B`` singular at ``w = 0`` in the two-level limit.
    """
    rows = [0, 2, 3]
    r = b[np.ix_(rows, rows)].copy()
    r[:, 0] = b[rows, 0] - b[rows, 1]
    return r, seed[rows]


def population_derivative(p: SystemParams, rho: np.ndarray) -> np.ndarray:
    """Time derivative of (rho33, rho11, rho22) for an arbitrary state."""
    lv = build_liouvillian(p)
    drho = lv.b @ rho + lv.drive
    rho22 = 1 - rho[0] - rho[1]
    g2, g3 = (0.0, 0.0) if p.two_level_branch else (p.gamma2, p.gamma3)
    d22 = 2 * g3 * rho[0] - 2 * g2 * rho22
    return np.array([drho[0], drho[1], d22])
