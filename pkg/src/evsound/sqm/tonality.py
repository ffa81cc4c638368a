"""Tonality: prominence of discrete spectral lines, in tonality units.

Per half-overlapping frame the spectrum is scanned for peaks standing well
above the local noise floor.  Each tone contributes a weight built from its
excess level, its frequency (dominance region around 0.7 kHz), and its
bandwidth; the combined tonal weight is then balanced against the fraction
of total loudness carried by the tones (loudness with and without the tone
lines).  The scale constant is frozen so a 1 kHz sine at 60 dB scores 1.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..signal import CalibratedSignal, P_REF
from .loudness import BAND_CENTERS, N_BANDS, _core_loudness, _grid_walk
from .trace import SqmTrace

FRAME_SECONDS = 0.5
HOP_SECONDS = 0.25
MIN_FREQ = 50.0
EXCESS_GATE_DB = 7.0

TONALITY_CAL = 1.1207
"""Scale constant fixing the 1-t.u. anchor (1 kHz sine at 60 dB)."""


def _critical_bandwidth(freq: np.ndarray | float) -> np.ndarray:
    f = np.asarray(freq, dtype=float)
    return 25.0 + 75.0 * (1.0 + 1.4 * (f / 1000.0) ** 2) ** 0.69


@lru_cache(maxsize=8)
def _band_masks(n_bins: int, bin_hz: float) -> np.ndarray:
    freqs = np.arange(n_bins) * bin_hz
    lower = BAND_CENTERS * 2.0 ** (-1.0 / 6.0)
    upper = BAND_CENTERS * 2.0 ** (1.0 / 6.0)
    return (freqs[None, :] >= lower[:, None]) & (freqs[None, :] < upper[:, None])


def _band_levels(power: np.ndarray, masks: np.ndarray) -> np.ndarray:
    floor = P_REF**2 * 1e-6
    band_power = masks @ power
    return 10.0 * np.log10(np.maximum(band_power, floor) / P_REF**2)


def _tone_weight(freq: np.ndarray, excess_db: np.ndarray, width_bark: np.ndarray) -> np.ndarray:
    w_level = 1.0 - np.exp(-excess_db / 15.0)
    w_freq = 1.0 / np.sqrt(1.0 + 0.2 * (freq / 700.0 + 700.0 / freq) ** 2)
    w_width = 0.13 / (0.13 + width_bark)
    return w_level * w_freq * w_width


def tonality_trace(signal: CalibratedSignal) -> SqmTrace:
    """Tonality-versus-time, 0.5 s frames every 0.25 s."""
    from scipy.ndimage import median_filter
    from scipy.signal import find_peaks

    fs = signal.sample_rate
    x = signal.mono().channel(0)
    n_frame = int(round(FRAME_SECONDS * fs))
    n_hop = int(round(HOP_SECONDS * fs))
    if len(x) < n_frame:
        n_frame = len(x)
    n_fft = 1 << int(np.ceil(np.log2(n_frame)))
    n_frames = 1 + (len(x) - n_frame) // n_hop
    window = np.hanning(n_frame)
    win_power = np.sum(window**2)
    bin_hz = fs / n_fft
    mainlobe_bins = 2.0 * n_fft / n_frame
    masks = _band_masks(n_fft // 2 + 1, bin_hz)
    freqs = np.arange(n_fft // 2 + 1) * bin_hz
    median_bins = 2 * int(75.0 / bin_hz) + 1  # ~150 Hz floor-estimation window

    times = np.empty(n_frames)
    tonal_weight = np.zeros(n_frames)
    level_cols = np.empty((N_BANDS, 2 * n_frames))
    for k in range(n_frames):
        seg = x[k * n_hop:k * n_hop + n_frame] * window
        spec = np.fft.rfft(seg, n_fft)
        power = (np.abs(spec) ** 2) / (win_power * n_frame)
        power[1:-1] *= 2.0
        db = 10.0 * np.log10(np.maximum(power, 1e-30) / P_REF**2)
        floor_db = median_filter(db, size=median_bins, mode="nearest")
        height = np.maximum(floor_db + EXCESS_GATE_DB,
                            np.max(db) - 50.0)
        peaks, props = find_peaks(db, height=height)
        peaks = peaks[freqs[peaks] >= MIN_FREQ]

        noise_power = power.copy()
        if peaks.size:
            order = np.argsort(db[peaks])[::-1]
            chosen: list[int] = []
            for p in peaks[order]:
                guard = 0.5 * _critical_bandwidth(freqs[p]) / bin_hz
                if all(abs(p - q) > guard for q in chosen):
                    chosen.append(int(p))
                if len(chosen) >= 12:
                    break
            chosen_arr = np.array(chosen)
            f_tone = freqs[chosen_arr]
            excess = db[chosen_arr] - floor_db[chosen_arr]
            # bandwidth above what the analysis window itself would produce
            widths = np.empty(len(chosen))
            for idx, p in enumerate(chosen_arr):
                thresh = db[p] - 3.0
                a = p
                while a > 0 and db[a - 1] >= thresh:
                    a -= 1
                b = p
                while b < len(db) - 1 and db[b + 1] >= thresh:
                    b += 1
                width_bins = max((b - a) - mainlobe_bins, 0.0)
                widths[idx] = width_bins * bin_hz / _critical_bandwidth(freqs[p])
                cut = int(np.ceil(mainlobe_bins)) + (b - a)
                noise_power[max(p - cut, 0):p + cut + 1] = 0.0
            w = _tone_weight(f_tone, excess, widths)
            tonal_weight[k] = np.sqrt(np.sum(w**2))

        level_cols[:, 2 * k] = _band_levels(power, masks)
        level_cols[:, 2 * k + 1] = _band_levels(noise_power, masks)
        times[k] = (k * n_hop + n_frame) / fs

    nm = _core_loudness(level_cols)
    totals, _ = _grid_walk(nm)
    n_total = totals[0::2]
    n_noise = totals[1::2]
    w_n = np.zeros(n_frames)
    audible = n_total > 1e-6
    w_n[audible] = np.clip(1.0 - n_noise[audible] / n_total[audible], 0.0, 1.0)
    values = TONALITY_CAL * tonal_weight**0.29 * w_n**0.79
    values[tonal_weight <= 0.0] = 0.0
    return SqmTrace(times=times, values=values, unit="t.u.")
