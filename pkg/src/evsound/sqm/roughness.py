"""Roughness: rapid-modulation strength around 70 Hz, in asper.

Per Bark channel the envelope modulation depth is weighted by a bandpass
curve whose best modulation frequency rises from about 40 Hz in the lowest
channels to 80 Hz at high frequencies; depths are combined quadratically with
the cross-channel coherence so incoherent noise fluctuations contribute
little.  The scale constant is frozen so a fully modulated 1 kHz tone at
60 dB and 70 Hz modulation scores 1 asper.
"""

from __future__ import annotations

import numpy as np

from ..signal import CalibratedSignal
from ._modulation import CHANNEL_BARK, band_envelopes, modulation_depths
from .trace import SqmTrace

FRAME_SECONDS = 0.2
HOP_SECONDS = 0.1
MOD_RANGE = (15.0, 400.0)

ROUGHNESS_CAL = 1.0
"""Scale constant fixing the 1-asper anchor (1 kHz, 60 dB, 100 % AM at 70 Hz)."""

_BEST_FREQ = np.clip(20.0 + 6.0 * CHANNEL_BARK, 40.0, 80.0)


def _weight(freqs: np.ndarray) -> np.ndarray:
    """Per-channel weight matrix: each row peaks at that channel's best
    modulation frequency."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(freqs[None, :] > 0.0, freqs[None, :] / _BEST_FREQ[:, None], 0.0)
    return (ratio * np.exp(1.0 - ratio)) ** 2


def roughness_trace(signal: CalibratedSignal,
                    envelopes: tuple[np.ndarray, float] | None = None) -> SqmTrace:
    """Roughness-versus-time (asper), 200 ms frames every 100 ms.

    ``envelopes`` accepts a precomputed :func:`band_envelopes` result so
    callers evaluating several modulation metrics pay for it once.
    """
    envs, env_rate = envelopes if envelopes is not None else band_envelopes(signal)
    times, depths, coherence = modulation_depths(
        envs, env_rate, FRAME_SECONDS, HOP_SECONDS, _weight, *MOD_RANGE)
    values = ROUGHNESS_CAL * np.sum((depths * coherence) ** 2, axis=0)
    return SqmTrace(times=times, values=values, unit="asper")
