"""Calibrated WAV input/output.

Samples are pascals in memory; on disk, digital full scale corresponds to a
configurable pressure (default 20 Pa = 114 dB SPL), and the factor travels in
the bundle manifest rather than the WAV itself.  Two encodings are supported:
24-bit PCM (packed manually, three bytes little-endian per sample) and 32-bit
IEEE float.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .signal import CalibratedSignal, SignalError

PA_PER_FULL_SCALE = 20.0
"""Default calibration: digital full scale = 20 Pa (114 dB re 20 uPa)."""

FORMATS = ("pcm24", "float32")

_WAVE_PCM = 1
_WAVE_FLOAT = 3


class WavError(SignalError):
    """Raised for unreadable files or out-of-range signal levels."""


def _check_headroom(samples: np.ndarray, pa_per_full_scale: float) -> None:
    peak = float(np.max(np.abs(samples))) if samples.size else 0.0
    if peak > pa_per_full_scale:
        need = 20.0 * np.log10(peak / pa_per_full_scale)
        raise WavError(
            f"signal peaks at {peak:.3f} Pa, above the {pa_per_full_scale:.3f} Pa "
            f"full scale; raise the calibration factor by at least {need:.2f} dB "
            f"or attenuate the signal")


def _pack_pcm24(x: np.ndarray) -> bytes:
    ints = np.clip(np.round(x * (2**23 - 1)), -(2**23), 2**23 - 1).astype(np.int32)
    b = np.empty((ints.size, 3), dtype=np.uint8)
    b[:, 0] = ints & 0xFF
    b[:, 1] = (ints >> 8) & 0xFF
    b[:, 2] = (ints >> 16) & 0xFF
    return b.tobytes()


def _unpack_pcm24(raw: bytes) -> np.ndarray:
    if len(raw) % 3:
        raise WavError("PCM24 data length is not a multiple of 3 bytes")
    b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
    ints = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
    ints -= (ints & 0x800000) << 1  # sign-extend 24-bit values
    return ints.astype(np.float64) / (2**23 - 1)


def write_wav(path: str | Path, signal: CalibratedSignal, fmt: str = "pcm24",
              pa_per_full_scale: float = PA_PER_FULL_SCALE) -> None:
    """Write a calibrated signal; raises WavError when it would clip."""
    if fmt not in FORMATS:
        raise WavError(f"format must be one of {FORMATS}, got {fmt!r}")
    if pa_per_full_scale <= 0:
        raise WavError(f"pa_per_full_scale must be > 0, got {pa_per_full_scale}")
    _check_headroom(signal.samples, pa_per_full_scale)
    interleaved = (signal.samples.T / pa_per_full_scale).reshape(-1)
    n_channels = signal.channels
    rate = int(round(signal.sample_rate))
    if fmt == "pcm24":
        payload = _pack_pcm24(interleaved)
        audio_fmt, bits = _WAVE_PCM, 24
    else:
        payload = interleaved.astype("<f4").tobytes()
        audio_fmt, bits = _WAVE_FLOAT, 32
    block_align = n_channels * bits // 8
    fmt_chunk = struct.pack("<HHIIHH", audio_fmt, n_channels, rate,
                            rate * block_align, block_align, bits)
    chunks = b"WAVE"
    chunks += b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk
    if audio_fmt == _WAVE_FLOAT:
        chunks += b"fact" + struct.pack("<II", 4, signal.n_samples)
    chunks += b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) % 2:
        chunks += b"\x00"
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(chunks)) + chunks)


def read_wav(path: str | Path,
             pa_per_full_scale: float = PA_PER_FULL_SCALE) -> CalibratedSignal:
    """Read a PCM24 or float32 WAV back into pascals."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise WavError(f"{path}: not a RIFF/WAVE file")
    pos = 12
    fmt_fields = None
    data = None
    while pos + 8 <= len(blob):
        cid = blob[pos:pos + 4]
        size = struct.unpack("<I", blob[pos + 4:pos + 8])[0]
        body = blob[pos + 8:pos + 8 + size]
        if len(body) < size:
            raise WavError(f"{path}: truncated {cid.decode('ascii', 'replace').strip()} chunk")
        if cid == b"fmt ":
            fmt_fields = struct.unpack("<HHIIHH", body[:16])
        elif cid == b"data":
            data = body
        pos += 8 + size + (size % 2)
    if fmt_fields is None or data is None:
        raise WavError(f"{path}: missing fmt or data chunk")
    audio_fmt, n_channels, rate, _, _, bits = fmt_fields
    if audio_fmt == _WAVE_PCM and bits == 24:
        x = _unpack_pcm24(data)
    elif audio_fmt == _WAVE_FLOAT and bits == 32:
        x = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise WavError(f"{path}: unsupported encoding (format {audio_fmt}, {bits} bit)")
    if n_channels not in (1, 2):
        raise WavError(f"{path}: expected mono or stereo, got {n_channels} channels")
    frames = x.reshape(-1, n_channels).T * pa_per_full_scale
    return CalibratedSignal(float(rate), frames[0] if n_channels == 1 else frames)
