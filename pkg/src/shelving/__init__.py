"""Resonance fluorescence of a driven three-level atom with a shelving level."""

from .errors import ShelvingError
from .liouvillian import SystemParams, steady_state_closed, steady_state_numeric
from .spectrum import incoherent_spectrum, peak_metrics_numeric, spectrum_curve

__version__ = "0.1.0"

__all__ = [
    "ShelvingError",
    "SystemParams",
    "incoherent_spectrum",
    "peak_metrics_numeric",
    "spectrum_curve",
    "steady_state_closed",
    "steady_state_numeric",
]
