"""Calibrated pressure signals.

A :class:`CalibratedSignal` stores instantaneous acoustic pressure in pascal,
one row per channel.  A sample value ``p`` means a sound pressure of ``p`` Pa,
so a sine of amplitude ``A`` has a sound pressure level of
``20*log10(A / (sqrt(2) * 20e-6))`` dB re 20 uPa.  Everything downstream
(levels, sound quality metrics) relies on this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

P_REF = 20e-6
"""Reference sound pressure, 20 uPa."""


class SignalError(ValueError):
    """Raised for invalid signal parameters or incompatible operands."""


@dataclass(frozen=True)
class CalibratedSignal:
    """Sampled acoustic pressure at a point.

    Parameters
    ----------
    sample_rate : float
        Sampling rate in Hz, > 0.
    samples : np.ndarray
        Pressure in Pa, shape ``(n,)`` for mono or ``(channels, n)``.
    """

    sample_rate: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise SignalError(f"sample_rate must be > 0, got {self.sample_rate}")
        data = np.asarray(self.samples, dtype=np.float64)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2:
            raise SignalError(f"samples must be 1-D or 2-D, got shape {data.shape}")
        if data.shape[0] not in (1, 2):
            raise SignalError(f"only 1 or 2 channels supported, got {data.shape[0]}")
        if not np.all(np.isfinite(data)):
            raise SignalError("samples contain NaN or Inf")
        data.setflags(write=False)
        object.__setattr__(self, "samples", data)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.n_samples / self.sample_rate

    @property
    def peak(self) -> float:
        """Largest absolute sample over all channels (Pa), for headroom checks."""
        if self.n_samples == 0:
            return 0.0
        return float(np.max(np.abs(self.samples)))

    def mono(self) -> "CalibratedSignal":
        """Return this signal if mono, else the channel average."""
        if self.channels == 1:
            return self
        return CalibratedSignal(self.sample_rate, self.samples.mean(axis=0))

    def channel(self, index: int) -> np.ndarray:
        return self.samples[index]

    def scaled(self, factor: float) -> "CalibratedSignal":
        return CalibratedSignal(self.sample_rate, self.samples * factor)

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    def rms(self) -> float:
        """Root-mean-square pressure over all samples of the first channel."""
        if self.n_samples == 0:
            raise SignalError("empty signal has no RMS")
        return float(np.sqrt(np.mean(self.channel(0) ** 2)))


def mix(signals: list[CalibratedSignal], gains: list[float] | None = None) -> CalibratedSignal:
    """Sample-wise weighted sum of signals.

    Shorter inputs are zero-padded at the tail; the output length is the
    longest input.  Sample rates and channel counts must match exactly
    (resampling is never implicit).
    """
    if not signals:
        raise SignalError("mix needs at least one signal")
    if gains is None:
        gains = [1.0] * len(signals)
    if len(gains) != len(signals):
        raise SignalError(f"{len(signals)} signals but {len(gains)} gains")
    rate = signals[0].sample_rate
    channels = signals[0].channels
    for s in signals[1:]:
        if s.sample_rate != rate:
            raise SignalError(f"sample rate mismatch: {s.sample_rate} != {rate}")
        if s.channels != channels:
            raise SignalError(f"channel count mismatch: {s.channels} != {channels}")
    n = max(s.n_samples for s in signals)
    out = np.zeros((channels, n))
    for s, g in zip(signals, gains):
        out[:, : s.n_samples] += g * s.samples
    return CalibratedSignal(rate, out if channels > 1 else out[0])


def amplitude_for_level(level_db: float) -> float:
    """Peak amplitude (Pa) of a sine whose L_p equals ``level_db`` dB re 20 uPa."""
    return np.sqrt(2.0) * P_REF * 10.0 ** (level_db / 20.0)
