"""Quantum-jump trajectories of the shelving dynamics and telegraph
statistics.

Between jumps the atom evolves in the driven subspace {|1>, |3>} under the
non-Hermitian Hamiltonian ``V - i (gamma + gamma3) |3><3|``. Jumps:

* ``31``: 3 -> 1 at rate 2 gamma, fluorescence photon, atom back in |1>
* ``32``: 3 -> 2 at rate 2 gamma3, atom shelved in |2> (dark period starts)
* ``21``: 2 -> 1 at rate 2 gamma2, exponential wait, atom back in |1>

Every jump leaves the atom in |1>, so the no-jump survival probability is a
single function of the time since the last jump. It is tabulated once per
parameter set with fixed-step RK4 and inverted for each jump by table
lookup plus bisection inside one step. The 1 <-> 2 and 3 <-> 2 couplings are
purely incoherent, so this restricted unravelling is exact.

Random numbers come from numpy's counter-based Philox generator keyed by
``seed`` (``seed + index`` for ensembles).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import curve_fit

from .errors import FitFailure, NoPeriods
from .liouvillian import SystemParams

CH31, CH32, CH21 = 0, 1, 2
CHANNEL_NAMES = ("31", "32", "21")
BISECT_TOL = 1e-6
CHUNK = 1 << 16


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    channels: np.ndarray  # int8 codes CH31 / CH32 / CH21
    duration: float
    seed: int

    @property
    def jumps(self) -> list[tuple[float, str]]:
        return [(float(t), CHANNEL_NAMES[c]) for t, c in zip(self.times, self.channels)]

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class TelegraphStats:
    tau_bright_est: float
    tau_dark_est: float
    stderr_bright: float
    stderr_dark: float
    n_bright: int
    n_dark: int


class WaitingTimeTable:
    """Survival probability ``P(t) = |psi(t)|^2`` of the no-jump evolution
    started in |1>, on a uniform grid of step ``h``."""

    def __init__(self, p: SystemParams, step: float | None = None):
        g = p.gamma + p.gamma3
        w, d = p.rabi, p.detuning
        # basis (|1>, |3>); d psi/dt = -i H_eff psi
        h_eff = np.array([[d, -w / 2], [-w / 2, -1j * g]], dtype=complex)
        self.gen = -1j * h_eff
        self.h = step if step is not None else 0.01 / max(p.generalized_rabi, p.gamma)
        self.step = self._rk4_matrix(self.h)
        self.states = np.array([[1.0 + 0j, 0.0 + 0j]])
        self.norms = np.array([1.0])

    def _rk4_matrix(self, s):
        """RK4 propagator for a linear system, for scalar or array step ``s``."""
        s = np.asarray(s, dtype=float)[..., None, None]
        a = self.gen * s
        a2 = a @ a
        return np.eye(2) + a + a2 / 2 + a2 @ a / 6 + a2 @ a2 / 24

    @property
    def t_max(self) -> float:
        return (len(self.norms) - 1) * self.h

    def extend(self, u_min: float, t_limit: float) -> None:
        """Grow the table until ``P < u_min`` or time exceeds ``t_limit``."""
        while self.norms[-1] >= u_min and self.t_max < t_limit:
            n = max(len(self.norms), 1024)
            block = np.empty((n, 2), dtype=complex)
            psi = self.states[-1]
            for i in range(n):
                psi = self.step @ psi
                block[i] = psi
            self.states = np.concatenate([self.states, block])
            norms = np.sum(np.abs(block) ** 2, axis=1)
            # RK4 norm is monotone for this dissipative step; enforce it for searchsorted
            norms = np.minimum.accumulate(np.concatenate([self.norms[-1:], norms]))[1:]
            self.norms = np.concatenate([self.norms, norms])

    def invert(self, u: np.ndarray, t_limit: float) -> np.ndarray:
        """Times at which ``P`` drops to ``u``; ``inf`` beyond ``t_limit``."""
        self.extend(float(np.min(u)), t_limit)
        # first grid index with P < u (norms decreasing)
        k = np.searchsorted(-self.norms, -u, side="right")
        out = np.full(u.shape, np.inf)
        inside = k < len(self.norms)
        k_in = k[inside]
        psi0 = self.states[k_in - 1]
        u_in = u[inside]
        lo = np.zeros(len(k_in))
        hi = np.full(len(k_in), self.h)
        while np.any(hi - lo > BISECT_TOL):
            mid = 0.5 * (lo + hi)
            psi = np.einsum("nij,nj->ni", self._rk4_matrix(mid), psi0)
            above = np.sum(np.abs(psi) ** 2, axis=1) >= u_in
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        out[inside] = (k_in - 1) * self.h + 0.5 * (lo + hi)
        return out


def simulate_trajectory(p: SystemParams, duration: float, seed: int,
                        chunk: int = CHUNK) -> TrajectoryRecord:
    """One quantum-jump record over ``[0, duration]``, starting in |1>.

    Deterministic for fixed ``seed`` and ``chunk``.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    empty = TrajectoryRecord(np.zeros(0), np.zeros(0, dtype=np.int8), duration, seed)
    if p.rabi == 0:
        return empty
    rng = make_rng(seed)
    table = WaitingTimeTable(p)
    p_shelve = p.gamma3 / (p.gamma + p.gamma3)
    dark_mean = 1 / (2 * p.gamma2) if p.gamma2 > 0 else math.inf
    t = 0.0
    times, channels = [], []
    while t < duration:
        u = 1.0 - rng.random(chunk)  # (0, 1]
        v = rng.random(chunk)
        e = rng.exponential(1.0, chunk) * dark_mean if p.gamma2 > 0 else np.full(chunk, np.inf)
        wait = table.invert(u, duration - t)
        shelved = v < p_shelve
        # interleave: bright wait (31 or 32), then dark wait (21) after a 32
        group = 1 + shelved.astype(int)
        start = np.concatenate([[0], np.cumsum(group)[:-1]])
        n = int(group.sum())
        intervals = np.empty(n)
        chans = np.empty(n, dtype=np.int8)
        intervals[start] = wait
        chans[start] = np.where(shelved, CH32, CH31)
        dark_pos = start[shelved] + 1
        intervals[dark_pos] = e[shelved]
        chans[dark_pos] = CH21
        tt = t + np.cumsum(intervals)
        keep = tt <= duration
        if not np.all(keep):
            stop = int(np.argmin(keep))
            times.append(tt[:stop])
            channels.append(chans[:stop])
            break
        times.append(tt)
        channels.append(chans)
        t = float(tt[-1])
    if not times:
        return empty
    return TrajectoryRecord(np.concatenate(times), np.concatenate(channels), duration, seed)


def classify_periods(rec: TrajectoryRecord) -> tuple[np.ndarray, np.ndarray]:
    """Bright and dark durations from the jump channels.

    A dark period runs from a 32 jump to the following 21 jump. A bright
    period runs from a 21 jump to the next 32 jump and must contain at least
    one 31 emission. The partial periods at both ends are dropped.
    """
    ch, t = rec.channels, rec.times
    i32 = np.flatnonzero(ch == CH32)
    i21 = np.flatnonzero(ch == CH21)
    n_dark = min(len(i32), len(i21))
    dark = t[i21[:n_dark]] - t[i32[:n_dark]]
    # bright period j: between dark j and dark j+1
    n_bright = max(min(len(i21), len(i32) - 1), 0)
    starts, ends = i21[:n_bright], i32[1:n_bright + 1]
    emissions = np.concatenate([[0], np.cumsum(ch == CH31)])
    has_photon = emissions[ends] - emissions[starts + 1] > 0
    bright = (t[ends] - t[starts])[has_photon]
    if len(bright) + len(dark) < 2:
        raise NoPeriods("fewer than two complete bright/dark periods")
    return bright, dark


def classify_periods_gap(rec: TrajectoryRecord, threshold: float | None = None,
                         gamma: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Photon-record classifier: any gap between 31 photons longer than
    ``threshold`` (default ``10 / (2 gamma)``) is a dark period."""
    if threshold is None:
        threshold = 10 / (2 * gamma)
    photons = rec.times[rec.channels == CH31]
    gaps = np.diff(photons)
    dark_idx = np.flatnonzero(gaps > threshold)
    dark = gaps[dark_idx]
    # bright: from first photon after a dark gap to last photon before the next
    bright = photons[dark_idx[1:]] - photons[dark_idx[:-1] + 1]
    if len(bright) + len(dark) < 2:
        raise NoPeriods("fewer than two complete bright/dark periods")
    return bright, dark


def _mean_stderr(x: np.ndarray) -> tuple[float, float]:
    if len(x) == 0:
        return math.nan, math.nan
    if len(x) == 1:
        return float(x[0]), math.nan
    return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x)))


def stats_from_periods(bright: np.ndarray, dark: np.ndarray) -> TelegraphStats:
    mb, sb = _mean_stderr(bright)
    md, sd = _mean_stderr(dark)
    return TelegraphStats(mb, md, sb, sd, len(bright), len(dark))


def estimate_taus(p: SystemParams, duration: float, seed: int) -> TelegraphStats:
    rec = simulate_trajectory(p, duration, seed)
    return stats_from_periods(*classify_periods(rec))


def write_jsonl(rec: TrajectoryRecord, path) -> None:
    with open(Path(path), "w") as fh:
        for t, c in zip(rec.times, rec.channels):
            fh.write(json.dumps({"t": float(t), "ch": CHANNEL_NAMES[c]}) + "\n")


def read_jsonl(path, duration: float, seed: int = 0) -> TrajectoryRecord:
    times, chans = [], []
    with open(Path(path)) as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                times.append(obj["t"])
                chans.append(CHANNEL_NAMES.index(obj["ch"]))
    return TrajectoryRecord(np.array(times, dtype=float), np.array(chans, dtype=np.int8), duration, seed)


# --- random telegraph process and its power spectrum -----------------------


def telegraph_samples(tau_b: float, tau_d: float, duration: float, dt: float,
                      rng: np.random.Generator) -> np.ndarray:
    """On/off indicator of a two-state process with exponential sojourns,
    sampled every ``dt``; the initial state is drawn from the stationary
    distribution."""
    n = int(duration / dt)
    on = rng.random() < tau_b / (tau_b + tau_d)
    means = np.array([tau_b, tau_d]) if on else np.array([tau_d, tau_b])
    boundaries = []
    total = 0.0
    while total <= duration:
        m = max(16, int(2 * (duration - total) / (tau_b + tau_d)) + 16)
        sojourn = rng.exponential(1.0, 2 * m).reshape(m, 2) * means
        b = total + np.cumsum(sojourn.ravel())
        boundaries.append(b)
        total = float(b[-1])
    edges = np.concatenate(boundaries)
    t = np.arange(n) * dt
    flips = np.searchsorted(edges, t, side="right")
    state = (flips % 2 == 0) == on
    return state.astype(float)


@dataclass
class Periodogram:
    """Bartlett-averaged two-sided power spectral density."""

    omega: np.ndarray
    power: np.ndarray
    n_segments: int = 0
    extra: dict = field(default_factory=dict)


def bartlett_psd(x: np.ndarray, dt: float, n_segments: int) -> Periodogram:
    """Average of rectangular-window periodograms over non-overlapping
    segments. Returns non-negative angular frequencies."""
    seg = len(x) // n_segments
    if seg < 8:
        raise ValueError("segments too short")
    y = x[: seg * n_segments].reshape(n_segments, seg)
    y = y - y.mean(axis=1, keepdims=True)
    power = np.mean(np.abs(np.fft.rfft(y, axis=1)) ** 2, axis=0) * dt / seg
    omega = 2 * math.pi * np.fft.rfftfreq(seg, dt)
    return Periodogram(omega, power, n_segments)


def _lorentz(omega, scale, width):
    return scale * width / (omega ** 2 + width ** 2)


def fit_lorentzian_hwhm(pg: Periodogram, max_rel_rms: float = 0.5) -> float:
    """HWHM of a zero-centred Lorentzian fitted to a periodogram.

    The fit window is ten times a half-maximum estimate; the DC bin is
    excluded because segment means are removed.
    """
    omega, power = pg.omega[1:], pg.power[1:]
    peak = float(np.mean(power[:3]))
    below = np.flatnonzero(power < 0.5 * peak)
    if len(below) == 0:
        raise FitFailure("spectrum never falls to half maximum")
    guess = float(omega[below[0]])
    window = omega <= 10 * guess
    if np.count_nonzero(window) < 5:
        raise FitFailure("fewer than five bins in the fit window; segments too short")
    try:
        (scale, width), _ = curve_fit(_lorentz, omega[window], power[window],
                                      p0=(peak * guess, guess), maxfev=10000)
    except RuntimeError as exc:
        raise FitFailure(str(exc)) from exc
    model = _lorentz(omega[window], scale, width)
    rel = (power[window] - model) / model
    if not np.isfinite(width) or width <= 0 or np.sqrt(np.mean(rel ** 2)) > max_rel_rms:
        raise FitFailure("Lorentzian fit residual above threshold")
    return abs(float(width))


def telegraph_psd(tau_b: float, tau_d: float, duration: float, n_trajectories: int,
                  seed: int, n_segments: int = 32) -> Periodogram:
    if tau_b <= 0 or tau_d <= 0:
        raise ValueError("sojourn times must be positive")
    if n_segments < 32:
        raise ValueError("Bartlett averaging needs at least 32 segments")
    dt = min(tau_b, tau_d) / 50
    acc = None
    for i in range(n_trajectories):
        x = telegraph_samples(tau_b, tau_d, duration, dt, make_rng(seed + i))
        pg = bartlett_psd(x, dt, n_segments)
        acc = pg.power if acc is None else acc + pg.power
    return Periodogram(pg.omega, acc / n_trajectories, n_segments * n_trajectories)


def telegraph_psd_hwhm(tau_b: float, tau_d: float, duration: float, n_trajectories: int,
                       seed: int, n_segments: int = 32) -> float:
    """Fitted HWHM of the telegraph power spectrum; estimates
    ``1/tau_b + 1/tau_d``."""
    pg = telegraph_psd(tau_b, tau_d, duration, n_trajectories, seed, n_segments)
    return fit_lorentzian_hwhm(pg)
