"""Sharpness: the high-frequency weighted centroid of specific loudness.

S = 0.11 * sum(N'(z) g(z) z dz) / N  [acum], with the weighting g(z) equal
to one below 15.8 Bark and rising exponentially above, so a narrowband noise
at 1 kHz and 60 dB scores 1 acum.
"""

from __future__ import annotations

import numpy as np

from ..signal import CalibratedSignal
from .loudness import BARK_GRID, specific_loudness_frames
from .trace import SqmTrace

_G = np.where(BARK_GRID <= 15.8, 1.0,
              0.15 * np.exp(0.42 * (BARK_GRID - 15.8)) + 0.85)


def sharpness_from_specific(ns: np.ndarray) -> np.ndarray:
    """Sharpness per frame from a (240, F) specific-loudness pattern."""
    ns = np.atleast_2d(ns.T).T
    total = np.sum(ns, axis=0) * 0.1
    weighted = np.sum(ns * (_G * BARK_GRID)[:, None], axis=0) * 0.1
    out = np.zeros(ns.shape[1])
    nonzero = total > 1e-9
    out[nonzero] = 0.11 * weighted[nonzero] / total[nonzero]
    return out


def sharpness_trace(signal: CalibratedSignal, diffuse: bool = False) -> SqmTrace:
    """Sharpness-versus-time (acum) on the loudness frame grid."""
    trace, ns = specific_loudness_frames(signal, diffuse=diffuse)
    values = sharpness_from_specific(ns)
    return SqmTrace(times=trace.times, values=values, unit="acum")
