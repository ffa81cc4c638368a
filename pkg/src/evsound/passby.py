"""Pass-by rendering: a moving point source heard by a stationary observer.

The source moves along a straight line at constant speed and lateral offset;
the observer sits at the origin.  Reception is computed on the emission
timeline solved in closed form (retarded time), so the Doppler shift, its
glide through the abeam point, and the spherical-spreading envelope all fall
out of the geometry rather than being imposed as separate effects.

Fractional-delay reads use a 32-tap Kaiser-windowed sinc interpolator, which
keeps tones clean to well above the frequencies used by the warning-sound
catalogue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signal import CalibratedSignal, SignalError

SOUND_SPEED = 343.0
REFERENCE_DISTANCE = 1.0
HEAD_RADIUS = 0.0875

_TAPS = 32
_KAISER_BETA = 8.6


@dataclass(frozen=True)
class Trajectory:
    """Straight constant-speed drive-by in the x direction at lateral offset y."""

    x_start: float = -60.0
    x_end: float = 60.0
    y: float = 3.0
    speed: float = 8.33
    sound_speed: float = SOUND_SPEED

    def __post_init__(self):
        if self.speed <= 0:
            raise SignalError(f"speed must be > 0, got {self.speed}")
        if self.speed >= self.sound_speed:
            raise SignalError(f"speed {self.speed} m/s must stay below c = {self.sound_speed} m/s")
        if self.x_end <= self.x_start:
            raise SignalError("x_end must be greater than x_start")
        if self.y <= 0:
            raise SignalError(f"lateral offset must be > 0, got {self.y}")

    @property
    def duration(self) -> float:
        return (self.x_end - self.x_start) / self.speed

    def position(self, tau: np.ndarray | float) -> np.ndarray:
        """Source x coordinate at emission time ``tau``."""
        return self.x_start + self.speed * np.asarray(tau, dtype=float)

    def distance(self, tau: np.ndarray | float) -> np.ndarray:
        """Source-observer distance at emission time ``tau``."""
        x = self.position(tau)
        return np.sqrt(x * x + self.y * self.y)


def emission_time(t: np.ndarray | float, traj: Trajectory) -> np.ndarray:
    """Emission time tau such that sound emitted at tau arrives at t.

    Closed-form root of c^2 (t - tau)^2 = (x0 + v tau)^2 + y^2 with tau < t.
    For v < c the discriminant is positive for every t, so the mapping is
    total and strictly increasing.
    """
    t = np.asarray(t, dtype=float)
    c, v, x0, y = traj.sound_speed, traj.speed, traj.x_start, traj.y
    c2v2 = c * c - v * v
    root = c * np.sqrt((x0 + v * t) ** 2 + (c2v2 / (c * c)) * y * y * np.ones_like(t))
    return (c * c * t + x0 * v - root) / c2v2


_PHASES = 4096
_OFFSETS = np.arange(-_TAPS // 2 + 1, _TAPS // 2 + 1)  # 32 taps around the interval


def _build_filter_table() -> np.ndarray:
    """Polyphase Kaiser-sinc bank: one 32-tap filter per fractional phase."""
    half = _TAPS // 2
    phases = np.arange(_PHASES + 1) / _PHASES
    rel = _OFFSETS[None, :] - phases[:, None]
    core = np.sinc(rel)
    arg = np.clip(rel / half, -1.0, 1.0)
    window = np.i0(_KAISER_BETA * np.sqrt(1.0 - arg * arg)) / np.i0(_KAISER_BETA)
    return core * window


_FILTER_TABLE = _build_filter_table()


def _kaiser_sinc_read(padded: np.ndarray, positions: np.ndarray) -> np.ndarray:
    """Read ``padded`` (already zero-padded by _TAPS/2 on each side) at
    fractional sample positions relative to the unpadded origin."""
    half = _TAPS // 2
    base = np.floor(positions).astype(np.int64)
    frac = positions - base
    idx = base[:, None] + _OFFSETS[None, :] + half  # shift into padded coords
    idx = np.clip(idx, 0, len(padded) - 1)
    scaled = frac * _PHASES
    row = scaled.astype(np.int64)
    blend = (scaled - row)[:, None]
    filt = _FILTER_TABLE[row] * (1.0 - blend) + _FILTER_TABLE[row + 1] * blend
    return np.sum(padded[idx] * filt, axis=1)


def _pad(x: np.ndarray) -> np.ndarray:
    half = _TAPS // 2
    return np.concatenate([np.zeros(half), x, np.zeros(half)])


def render_passby(source: CalibratedSignal, traj: Trajectory,
                  r_ref: float = REFERENCE_DISTANCE, chunk: int = 1 << 16) -> CalibratedSignal:
    """Mono pressure at the observer for a source waveform defined at ``r_ref``.

    The output timeline starts at the arrival of the source's first sample
    (t0 = r(0)/c) and spans the trajectory duration.  Each output sample is
    the source read at its emission time and scaled by r_ref / r, so the
    Doppler shift and spreading loss come from the same geometry.
    """
    if source.channels != 1:
        raise SignalError("pass-by source must be single-channel")
    fs = source.sample_rate
    n_out = int(round(traj.duration * fs))
    t0 = float(traj.distance(0.0)) / traj.sound_speed
    padded = _pad(source.channel(0))
    out = np.empty(n_out)
    for a in range(0, n_out, chunk):
        b = min(a + chunk, n_out)
        t = t0 + np.arange(a, b) / fs
        tau = emission_time(t, traj)
        r = traj.distance(tau)
        out[a:b] = _kaiser_sinc_read(padded, tau * fs) * (r_ref / r)
    return CalibratedSignal(fs, out)


def _itd(azimuth: np.ndarray, head_radius: float, c: float) -> np.ndarray:
    """Woodworth interaural time difference for a spherical head (seconds)."""
    a = np.abs(azimuth)
    return (head_radius / c) * (a + np.sin(a))


def stereo_stage(received: CalibratedSignal, traj: Trajectory,
                 head_radius: float = HEAD_RADIUS, chunk: int = 1 << 16) -> CalibratedSignal:
    """Spread a rendered mono pass-by onto two ears.

    Constant-power panning follows the source azimuth (atan2(x, y): negative
    to the left, zero abeam) and the far ear is delayed by the Woodworth
    time difference.  Per-sample channel powers sum to the mono power, so an
    energetic downmix reproduces the input level.
    """
    if received.channels != 1:
        raise SignalError("stereo stage expects the mono rendered signal")
    fs = received.sample_rate
    n = received.n_samples
    t0 = float(traj.distance(0.0)) / traj.sound_speed
    padded = _pad(received.channel(0))
    left = np.empty(n)
    right = np.empty(n)
    for a in range(0, n, chunk):
        b = min(a + chunk, n)
        k = np.arange(a, b)
        t = t0 + k / fs
        tau = emission_time(t, traj)
        az = np.arctan2(traj.position(tau), traj.y)
        pan = (az + np.pi / 2.0) / 2.0  # 0 = hard left, pi/2 = hard right
        g_left = np.cos(pan)
        g_right = np.sin(pan)
        itd = _itd(az, head_radius, traj.sound_speed)
        delay_left = np.where(az > 0.0, itd, 0.0)  # far ear lags
        delay_right = np.where(az < 0.0, itd, 0.0)
        left[a:b] = g_left * _kaiser_sinc_read(padded, k - delay_left * fs)
        right[a:b] = g_right * _kaiser_sinc_read(padded, k - delay_right * fs)
    return CalibratedSignal(fs, np.stack([left, right]))
