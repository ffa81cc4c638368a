"""Shared machinery for modulation-based metrics (roughness, fluctuation).

The signal is split into 24 one-Bark channels, each channel's envelope is
taken from the band-limited analytic signal and decimated, and per-frame
modulation depths are read from the envelope spectrum with a metric-specific
modulation-frequency weighting.  Envelope correlation between channels two
Bark apart separates coherent modulation (gated or AM sounds) from the
incoherent envelope fluctuations of broadband noise.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import fft as sfft
from scipy.signal import resample_poly

from ..signal import CalibratedSignal, SignalError

N_CHANNELS = 24
ENVELOPE_RATE = 1500.0


def bark_to_hz(z: np.ndarray | float) -> np.ndarray:
    """Inverse Bark scale (Traunmueller)."""
    z = np.asarray(z, dtype=float)
    return 1960.0 * (z + 0.53) / (26.28 - z)


_EDGES_BARK = np.arange(N_CHANNELS + 1, dtype=float)  # 0..24 Bark
_EDGES_HZ = bark_to_hz(_EDGES_BARK)
CHANNEL_BARK = _EDGES_BARK[:-1] + 0.5


def band_envelopes(signal: CalibratedSignal) -> tuple[np.ndarray, float]:
    """Envelopes of the 24 Bark channels, decimated to ENVELOPE_RATE.

    Returns (envelopes (24, M), envelope_rate).  Stereo input is averaged to
    one channel before analysis.
    """
    fs = signal.sample_rate
    x = signal.mono().channel(0)
    n = len(x)
    n_fft = sfft.next_fast_len(n)
    spectrum = sfft.fft(x, n_fft)
    freqs = np.fft.fftfreq(n_fft, 1.0 / fs)
    factor = int(round(fs / ENVELOPE_RATE))
    if factor < 1:
        raise SignalError("sample rate below the envelope rate")
    envs = []
    for c in range(N_CHANNELS):
        lo, hi = _EDGES_HZ[c], min(_EDGES_HZ[c + 1], fs / 2.0)
        if lo >= fs / 2.0:
            envs.append(np.zeros(int(np.ceil(n / factor))))
            continue
        masked = np.zeros_like(spectrum)
        sel = (freqs >= lo) & (freqs < hi)
        masked[sel] = 2.0 * spectrum[sel]  # one-sided: analytic signal
        env = np.abs(sfft.ifft(masked))[:n]
        envs.append(resample_poly(env, 1, factor))
    return np.stack(envs), fs / factor


def modulation_depths(envs: np.ndarray, env_rate: float, frame_s: float, hop_s: float,
                      weight_fn, f_min: float, f_max: float,
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weighted modulation depth and cross-channel coherence per frame.

    Returns (times (F,), depths (24, F), coherence (24, F)).  The depth of a
    channel is the weighted RMS of its envelope spectrum lines relative to
    the envelope mean, capped at 1; coherence is the product of envelope
    correlations with the channels two Bark below and above.  ``weight_fn``
    may return one weight row shared by all channels or a per-channel
    (24, n_lines) matrix.
    """
    n_frame = int(round(frame_s * env_rate))
    n_hop = int(round(hop_s * env_rate))
    if n_frame < 8 or n_hop < 1:
        raise SignalError("modulation frame too short")
    n_channels, m = envs.shape
    if m < n_frame:
        n_frame = m  # analyze short signals as a single frame
    n_frames = 1 + (m - n_frame) // n_hop
    window = np.hanning(n_frame)
    coherent_gain = np.sum(window) / 2.0
    freqs = np.fft.rfftfreq(n_frame, 1.0 / env_rate)
    weights = np.atleast_2d(np.asarray(weight_fn(freqs), dtype=float))
    weights = np.broadcast_to(weights, (n_channels, freqs.size)).copy()
    weights[:, (freqs < f_min) | (freqs > f_max)] = 0.0

    segs = sliding_window_view(envs, n_frame, axis=1)[:, ::n_hop, :][:, :n_frames, :]
    means = np.mean(segs, axis=2)                      # (C, F)
    ac = segs - means[..., None]
    spec = np.fft.rfft(ac * window, axis=2)
    amps = np.abs(spec) / coherent_gain                # sine-amplitude calibrated
    safe = np.maximum(means, 1e-12)
    depths = np.minimum(
        np.sqrt(np.sum((amps * weights[:, None, :]) ** 2, axis=2)) / safe, 1.0)
    depths[means <= 1e-12] = 0.0

    # correlation with the channel two Bark up; a channel counts as silent
    # (correlation left at 1) when its envelope is negligible, so numeric
    # residue in empty bands cannot masquerade as decorrelation
    norms = np.sqrt(np.sum(ac * ac, axis=2))           # (C, F)
    active = (means > 1e-9) & (norms > 1e-6 * np.max(norms, axis=0, keepdims=True))
    dots = np.sum(ac[:-2] * ac[2:], axis=2)
    denom = norms[:-2] * norms[2:]
    pair_ok = active[:-2] & active[2:]
    corr = np.clip(np.divide(dots, denom, out=np.ones_like(dots),
                             where=denom > 0.0), 0.0, 1.0)
    fwd = np.ones((n_channels, n_frames))
    fwd[:-2] = np.where(pair_ok, corr, 1.0)
    back = np.vstack([np.ones((2, n_frames)), fwd[:-2]])
    coherence = back * fwd
    times = (np.arange(n_frames) * n_hop + n_frame) / env_rate
    return times, depths, coherence
