"""Perceived-noise-level chain: noys, PNL, tone-corrected PNLT, and EPNL.

Implements the certification-style procedure over 24 third-octave bands
(50 Hz .. 10 kHz) in 0.5 s frames: band levels are converted to perceived
noisiness via the piecewise noy tables, summed, mapped to PNL, corrected for
spectral irregularities (protruding tones), and integrated over the 10-dB-down
window into a single effective level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .levels import FRAME_STEP, ThirdOctaveFrame, third_octave_frames
from .signal import CalibratedSignal, SignalError

NOMINAL_CENTERS = np.array([50, 63, 80, 100, 125, 160, 200, 250, 315, 400, 500, 630,
                            800, 1000, 1250, 1600, 2000, 2500, 3150, 4000, 5000,
                            6300, 8000, 10000], dtype=float)

# Piecewise noy-curve parameters per band (slopes are log10-noys per dB).
_M_B = np.array([0.043478, 0.040570, 0.036831, 0.036831, 0.035336, 0.033333,
                 0.033333, 0.032051, 0.030675, 0.030103, 0.030103, 0.030103,
                 0.030103, 0.030103, 0.030103, 0.029960, 0.029960, 0.029960,
                 0.029960, 0.029960, 0.029960, 0.029960, 0.042285, 0.042285])
_M_C = np.array([0.030103, 0.030103, 0.030103, 0.030103, 0.030103, 0.030103,
                 0.030103, 0.030103, 0.030103, 0.0, 0.0, 0.0,
                 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                 0.0, 0.0, 0.0, 0.0, 0.029960, 0.029960])
_M_D = np.array([0.079520, 0.068160, 0.068160, 0.059640, 0.053013, 0.053013,
                 0.053013, 0.053013, 0.053013, 0.053013, 0.053013, 0.053013,
                 0.053013, 0.053013, 0.059640, 0.053013, 0.053013, 0.047712,
                 0.047712, 0.053013, 0.053013, 0.068160, 0.079520, 0.059640])
_M_E = np.array([0.058098, 0.058098, 0.052288, 0.047534, 0.043573, 0.043573,
                 0.040221, 0.037349, 0.034859, 0.034859, 0.034859, 0.034859,
                 0.034859, 0.034859, 0.034859, 0.040221, 0.037349, 0.034859,
                 0.034859, 0.034859, 0.034859, 0.037349, 0.037349, 0.043573])
_SPL_A = np.array([91.0, 85.9, 87.3, 79.9, 79.8, 76.0, 74.0, 74.9, 94.6,
                   np.inf, np.inf, np.inf, np.inf, np.inf, np.inf, np.inf,
                   np.inf, np.inf, np.inf, np.inf, np.inf, np.inf, 44.3, 50.7])
_SPL_B = np.array([64.0, 60.0, 56.0, 53.0, 51.0, 48.0, 46.0, 44.0, 42.0, 40.0,
                   40.0, 40.0, 40.0, 40.0, 38.0, 34.0, 32.0, 30.0, 29.0, 29.0,
                   30.0, 30.0, 37.0, 41.0])
_SPL_C = np.array([52.0, 51.0, 49.0, 47.0, 46.0, 45.0, 43.0, 42.0, 41.0, 40.0,
                   40.0, 40.0, 40.0, 40.0, 38.0, 34.0, 32.0, 30.0, 29.0, 29.0,
                   30.0, 31.0, 34.0, 37.0])
_SPL_D = np.array([49.0, 44.0, 39.0, 34.0, 30.0, 27.0, 24.0, 21.0, 18.0, 16.0,
                   16.0, 16.0, 16.0, 16.0, 15.0, 12.0, 9.0, 5.0, 4.0, 5.0,
                   6.0, 10.0, 17.0, 21.0])
_SPL_E = np.array([55.0, 51.0, 46.0, 42.0, 39.0, 36.0, 33.0, 30.0, 27.0, 25.0,
                   25.0, 25.0, 25.0, 25.0, 23.0, 21.0, 18.0, 15.0, 14.0, 14.0,
                   15.0, 17.0, 23.0, 29.0])

_TONE_RANGE = (NOMINAL_CENTERS >= 500.0) & (NOMINAL_CENTERS <= 5000.0)

EPNL_FRAME_STEP = FRAME_STEP
EPNL_REFERENCE_TIME = 10.0
EPNL_WINDOW_DB = 10.0


def noys(spl: np.ndarray) -> np.ndarray:
    """Perceived noisiness per band for one 24-band frame."""
    spl = np.asarray(spl, dtype=float)
    if spl.shape != (24,):
        raise SignalError(f"expected 24 band levels, got shape {spl.shape}")
    out = np.zeros(24)
    hi = spl >= _SPL_A
    out[hi] = 10.0 ** (_M_C[hi] * (spl[hi] - _SPL_C[hi]))
    mid = (~hi) & (spl >= _SPL_B)
    out[mid] = 10.0 ** (_M_B[mid] * (spl[mid] - _SPL_B[mid]))
    low = (~hi) & (~mid) & (spl >= _SPL_E)
    out[low] = 0.3 * 10.0 ** (_M_E[low] * (spl[low] - _SPL_E[low]))
    lowest = (~hi) & (~mid) & (~low) & (spl >= _SPL_D)
    out[lowest] = 0.1 * 10.0 ** (_M_D[lowest] * (spl[lowest] - _SPL_D[lowest]))
    return out


def pnl(spl: np.ndarray) -> float:
    """Perceived noise level of one frame (PNdB)."""
    n = noys(spl)
    total = float(np.max(n) + 0.15 * (np.sum(n) - np.max(n)))
    if total <= 0.0:
        return 0.0
    return 40.0 + (10.0 / np.log10(2.0)) * np.log10(total)


def tone_correction(spl: np.ndarray) -> float:
    """Tone correction C for one frame via the slope-smoothing procedure."""
    spl = np.asarray(spl, dtype=float)
    if spl.shape != (24,):
        raise SignalError(f"expected 24 band levels, got shape {spl.shape}")
    nb = 24

    # step 1: slopes, defined from the 4th band upward
    s = np.zeros(nb)
    s[3:] = spl[3:] - spl[2:-1]

    # step 2: encircle bands where the slope changes by more than 5 dB
    encircled = np.zeros(nb, dtype=bool)
    for i in range(1, nb):
        if abs(s[i] - s[i - 1]) > 5.0:
            if s[i] > 0.0 and s[i] > s[i - 1]:
                encircled[i] = True
            elif s[i] <= 0.0 < s[i - 1]:
                encircled[i - 1] = True

    # step 3: adjusted levels for encircled bands
    adj = spl.copy()
    for i in range(nb):
        if encircled[i]:
            if i < nb - 1:
                adj[i] = 0.5 * (spl[i - 1] + spl[i + 1])
            else:
                adj[i] = spl[i - 2] + s[i - 1]

    # step 4: new slopes, extended at both ends
    s_new = np.zeros(nb + 1)
    s_new[3:nb] = adj[3:] - adj[2:-1]
    s_new[2] = s_new[3]
    s_new[nb] = s_new[nb - 1]

    # step 5: three-point average slopes
    s_bar = np.zeros(nb)
    s_bar[2:nb - 1] = (s_new[2:nb - 1] + s_new[3:nb] + s_new[4:nb + 1]) / 3.0

    # step 6: reconstruct a smooth spectrum from the 3rd band
    smooth = np.zeros(nb)
    smooth[2] = spl[2]
    for i in range(3, nb):
        smooth[i] = smooth[i - 1] + s_bar[i - 1]

    # step 7: protrusions above the smooth spectrum
    f = spl - smooth
    f[f < 1.5] = 0.0
    f[:2] = 0.0

    # step 8: per-band corrections, frequency dependent
    c = np.zeros(nb)
    for i in range(2, nb):
        fi = f[i]
        if fi <= 0.0:
            continue
        if _TONE_RANGE[i]:
            if fi >= 20.0:
                c[i] = 20.0 / 3.0
            elif fi >= 3.0:
                c[i] = fi / 3.0
            else:
                c[i] = 2.0 * fi / 3.0 - 1.0
        else:
            if fi >= 20.0:
                c[i] = 10.0 / 3.0
            elif fi >= 3.0:
                c[i] = fi / 6.0
            else:
                c[i] = fi / 3.0 - 0.5
    return float(np.max(c))


def pnlt(spl: np.ndarray) -> float:
    """Tone-corrected perceived noise level of one frame (TPNdB)."""
    return pnl(spl) + tone_correction(spl)


@dataclass(frozen=True)
class PnlResult:
    """Frame-wise perceived-noise trace with its scalar summaries."""

    times: np.ndarray
    pnl: np.ndarray
    pnlt: np.ndarray
    pnlt_max: float
    epnl: float


def epnl(pnlt_values: np.ndarray, frame_step: float = EPNL_FRAME_STEP,
         reference_time: float = EPNL_REFERENCE_TIME) -> float:
    """Effective perceived noise level from a PNLT trace.

    Integrates only the frames within ``EPNL_WINDOW_DB`` of the maximum, so
    frames below the window have exactly no influence:
    EPNL = 10 log10( sum 10^(PNLT_k/10) * dt / T0 ) over the window.
    """
    values = np.asarray(pnlt_values, dtype=float)
    if values.size == 0:
        raise SignalError("empty PNLT trace")
    peak = float(np.max(values))
    window = values[values >= peak - EPNL_WINDOW_DB]
    total = np.sum(10.0 ** (window / 10.0)) * frame_step / reference_time
    return float(10.0 * np.log10(total))


def pnl_chain(frames: list[ThirdOctaveFrame], frame_step: float = EPNL_FRAME_STEP) -> PnlResult:
    """Run the full noisiness chain over a sequence of band-level frames."""
    if not frames:
        raise SignalError("no frames to analyze")
    times = np.array([f.time for f in frames])
    pnls = np.array([pnl(f.levels) for f in frames])
    pnlts = np.array([p + tone_correction(f.levels) for p, f in zip(pnls, frames)])
    return PnlResult(times=times, pnl=pnls, pnlt=pnlts,
                     pnlt_max=float(np.max(pnlts)),
                     epnl=epnl(pnlts, frame_step))


def perceived_noise(signal: CalibratedSignal) -> PnlResult:
    """Convenience wrapper: band frames then the chain, 0.5 s frames."""
    return pnl_chain(third_octave_frames(signal, FRAME_STEP), FRAME_STEP)
