"""Sound pressure level metrics: L_p,eq, exponentially smoothed L_p,max,
fractional-octave band frames, and spectrogram extraction.

All levels are in dB re 20 uPa.  Multichannel input is reduced by averaging
channel power, which matches a single microphone placed between the ears for
symmetric stereo material.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import CalibratedSignal, P_REF, SignalError

TIME_FAST = 0.125
TIME_SLOW = 1.0

FRAME_STEP = 0.5
"""Hop/length of the band-level frames used by the noisiness chain (s)."""

LEVEL_FLOOR_DB = -60.0
"""Sentinel for bands with no measurable energy."""

# 24 preferred third-octave centre frequencies, 50 Hz .. 10 kHz.  Centres and
# edges both use base-10 spacing so adjacent bands tile without gap or overlap.
BAND_INDEX = np.arange(-13, 11)
BAND_CENTERS = 1000.0 * 10.0 ** (BAND_INDEX / 10.0)
BAND_LOWER = BAND_CENTERS * 10.0 ** (-1.0 / 20.0)
BAND_UPPER = BAND_CENTERS * 10.0 ** (1.0 / 20.0)


def _mean_square(signal: CalibratedSignal) -> np.ndarray:
    """Across-channel mean of squared pressure, one value per sample."""
    return np.mean(signal.samples**2, axis=0)


def lp_eq(signal: CalibratedSignal) -> float:
    """Equivalent continuous level over the whole signal, dB re 20 uPa."""
    power = float(np.mean(_mean_square(signal)))
    if power <= 0.0:
        raise SignalError("cannot compute a level for an all-zero signal")
    return 10.0 * np.log10(power / P_REF**2)


def level_trace(signal: CalibratedSignal, time_constant: float = TIME_FAST) -> np.ndarray:
    """Exponentially time-weighted level for every sample, dB re 20 uPa."""
    if time_constant <= 0:
        raise SignalError(f"time constant must be > 0, got {time_constant}")
    alpha = float(np.exp(-1.0 / (signal.sample_rate * time_constant)))
    sq = _mean_square(signal)
    # one-pole smoother: y[n] = alpha*y[n-1] + (1-alpha)*x[n]
    from scipy.signal import lfilter

    smoothed = lfilter([1.0 - alpha], [1.0, -alpha], sq)
    floor = P_REF**2 * 10.0 ** (LEVEL_FLOOR_DB / 10.0)
    return 10.0 * np.log10(np.maximum(smoothed, floor) / P_REF**2)


def lp_max(signal: CalibratedSignal, time_constant: float = TIME_FAST) -> float:
    """Maximum exponentially smoothed level (``TIME_FAST`` or ``TIME_SLOW``)."""
    return float(np.max(level_trace(signal, time_constant)))


@dataclass(frozen=True)
class ThirdOctaveFrame:
    """Band levels of one analysis frame."""

    time: float
    levels: np.ndarray  # dB re 20 uPa, aligned with BAND_CENTERS


def band_levels(spectrum_power: np.ndarray, freqs: np.ndarray,
                centers: np.ndarray = BAND_CENTERS) -> np.ndarray:
    """Integrate a one-sided power spectrum (Pa^2 per bin) into band levels."""
    lower = centers * 10.0 ** (-1.0 / 20.0)
    upper = centers * 10.0 ** (1.0 / 20.0)
    floor = P_REF**2 * 10.0 ** (LEVEL_FLOOR_DB / 10.0)
    out = np.empty(len(centers))
    for i in range(len(centers)):
        mask = (freqs >= lower[i]) & (freqs < upper[i])
        power = float(np.sum(spectrum_power[mask]))
        out[i] = 10.0 * np.log10(max(power, floor) / P_REF**2)
    return out


def _frame_power_spectrum(x: np.ndarray, sample_rate: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided power spectrum of a frame in Pa^2 per bin (Hann, power-scaled)."""
    n = len(x)
    window = np.hanning(n)
    scale = np.sum(window**2)
    spectrum = np.fft.rfft(x * window)
    power = (np.abs(spectrum) ** 2) / scale
    power[1:-1] *= 2.0  # fold negative frequencies
    if n % 2:
        power[-1] *= 2.0
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    return power / n, freqs


def third_octave_frames(signal: CalibratedSignal, frame_step: float = FRAME_STEP) -> list[ThirdOctaveFrame]:
    """Successive 24-band third-octave frames (50 Hz .. 10 kHz).

    Frames are adjacent (hop == length) and the trailing partial frame is
    dropped.  Band power is integrated in the frequency domain so the total
    over all bins reproduces the frame's mean-square pressure.
    """
    if frame_step <= 0:
        raise SignalError(f"frame step must be > 0, got {frame_step}")
    n_frame = int(round(frame_step * signal.sample_rate))
    if n_frame < 16:
        raise SignalError("frame step too short for band analysis")
    frames: list[ThirdOctaveFrame] = []
    n_frames = signal.n_samples // n_frame
    for k in range(n_frames):
        power = None
        for ch in range(signal.channels):
            seg = signal.channel(ch)[k * n_frame:(k + 1) * n_frame]
            p, freqs = _frame_power_spectrum(seg, signal.sample_rate)
            power = p if power is None else power + p
        power /= signal.channels
        frames.append(ThirdOctaveFrame(time=k * frame_step,
                                       levels=band_levels(power, freqs)))
    return frames


@dataclass(frozen=True)
class Spectrogram:
    """Magnitude spectrogram in dB re 20 uPa per sqrt(Hz)."""

    times: np.ndarray
    freqs: np.ndarray
    levels_db: np.ndarray  # (n_freqs, n_times)


def spectrogram(signal: CalibratedSignal, n_fft: int = 4096, overlap: float = 0.75) -> Spectrogram:
    """Hann-windowed STFT magnitude as spectral density levels."""
    if not 0.0 <= overlap < 1.0:
        raise SignalError(f"overlap must be in [0, 1), got {overlap}")
    from scipy.signal import stft

    hop = max(1, int(round(n_fft * (1.0 - overlap))))
    psd = None
    for ch in range(signal.channels):
        freqs, times, z = stft(signal.channel(ch), fs=signal.sample_rate,
                               window="hann", nperseg=n_fft, noverlap=n_fft - hop,
                               scaling="psd", boundary=None, padded=False)
        p = np.abs(z) ** 2
        psd = p if psd is None else psd + p
    density = np.sqrt(psd / signal.channels)  # Pa / sqrt(Hz)
    floor = P_REF * 10.0 ** (LEVEL_FLOOR_DB / 20.0)
    levels = 20.0 * np.log10(np.maximum(density, floor) / P_REF)
    return Spectrogram(times=times, freqs=freqs, levels_db=levels)
