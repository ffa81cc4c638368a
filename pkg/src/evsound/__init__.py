"""Synthesis, pass-by auralization, and psychoacoustic analysis of
electric-vehicle exterior warning sounds."""

from .signal import CalibratedSignal, P_REF, SignalError, amplitude_for_level, mix

__all__ = [
    "CalibratedSignal",
    "P_REF",
    "SignalError",
    "amplitude_for_level",
    "mix",
]

__version__ = "0.1.0"
