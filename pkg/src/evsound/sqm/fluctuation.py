"""Fluctuation strength: slow-modulation strength around 4 Hz, in vacil.

Same channel/envelope machinery as roughness but with two-second frames and
a weighting that peaks at 4 Hz modulation, so slowly gated or beating sounds
score high while steady ones score near zero.  The scale constant is frozen
so a fully modulated 1 kHz tone at 60 dB and 4 Hz modulation scores 1 vacil.
"""

from __future__ import annotations

import numpy as np

from ..signal import CalibratedSignal
from ._modulation import band_envelopes, modulation_depths
from .trace import SqmTrace

FRAME_SECONDS = 2.0
HOP_SECONDS = 0.5
MOD_RANGE = (0.25, 32.0)
BEST_FREQ = 4.0

FLUCTUATION_CAL = 1.0
"""Scale constant fixing the 1-vacil anchor (1 kHz, 60 dB, 100 % AM at 4 Hz)."""


def _weight(freqs: np.ndarray) -> np.ndarray:
    out = np.zeros_like(freqs)
    pos = freqs > 0.0
    f = freqs[pos]
    out[pos] = 2.0 / (f / BEST_FREQ + BEST_FREQ / f)
    return out


def fluctuation_trace(signal: CalibratedSignal,
                      envelopes: tuple[np.ndarray, float] | None = None) -> SqmTrace:
    """Fluctuation-strength-versus-time (vacil), 2 s frames every 0.5 s.

    ``envelopes`` accepts a precomputed :func:`band_envelopes` result so
    callers evaluating several modulation metrics pay for it once.
    """
    envs, env_rate = envelopes if envelopes is not None else band_envelopes(signal)
    times, depths, coherence = modulation_depths(
        envs, env_rate, FRAME_SECONDS, HOP_SECONDS, _weight, *MOD_RANGE)
    values = FLUCTUATION_CAL * np.sum((depths * coherence) ** 2, axis=0)
    return SqmTrace(times=times, values=values, unit="vacil")
