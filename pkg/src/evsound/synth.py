"""Parametric synthesis of the exterior-sound stimuli.

The built-in catalogue covers fifteen stimuli: continuous pure tones,
intermittent pure tones (500 ms on / 500 ms off), combined tones with
secondary components at +/-90 Hz, a double-beep pattern alternating between
1800 and 1900 Hz, an engine-like surrogate (or a user-supplied recording),
and a tyre-noise-only case.  All tone synthesis starts at phase 0 and every
gate or beep boundary is shaped with a short raised-cosine ramp so that the
gating itself does not inject broadband clicks into the metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signal import CalibratedSignal, P_REF, SignalError, mix
from .weighting import a_weight

RAMP_MS = 5.0
"""Raised-cosine ramp length applied at gate/beep boundaries and signal edges."""

DEFAULT_SAMPLE_RATE = 48000

DEFAULT_BEEP_PATTERN: tuple[tuple[float, float | None], ...] = (
    (240.0, 1800.0),
    (10.0, None),
    (240.0, 1900.0),
    (1000.0, None),
)

STIMULUS_KINDS = ("pure", "intermittent", "combined", "double_beep", "file_bed", "silence")
BED_KINDS = ("tyre_surrogate", "background_surrogate", "engine_surrogate")


@dataclass(frozen=True)
class StimulusSpec:
    """Declarative description of one catalogue stimulus."""

    id: int
    kind: str
    label: str = ""
    principal_freq: float | None = None
    secondary_offset: float = 90.0
    secondary_gain: float = 0.5
    on_ms: float | None = None
    off_ms: float | None = None
    beep_pattern: tuple[tuple[float, float | None], ...] | None = None
    bed_path: str | None = None
    normalize: bool = True

    def __post_init__(self):
        if self.kind not in STIMULUS_KINDS:
            raise SignalError(f"unknown stimulus kind {self.kind!r}")
        if not 1 <= self.id <= 15:
            raise SignalError(f"stimulus id must be 1..15, got {self.id}")
        if self.kind in ("pure", "intermittent", "combined"):
            if self.principal_freq is None or self.principal_freq <= 0:
                raise SignalError(f"stimulus {self.id}: principal_freq must be > 0")
        if self.kind == "intermittent":
            if not self.on_ms or not self.off_ms or self.on_ms <= 0 or self.off_ms <= 0:
                raise SignalError(f"stimulus {self.id}: on_ms/off_ms must be > 0")
        if self.kind == "combined" and self.secondary_offset >= (self.principal_freq or 0):
            raise SignalError(f"stimulus {self.id}: secondary offset must stay below principal")

    def to_dict(self) -> dict:
        d = {"id": self.id, "kind": self.kind, "label": self.label, "normalize": self.normalize}
        if self.kind in ("pure", "intermittent", "combined"):
            d["principal_freq"] = self.principal_freq
        if self.kind == "combined":
            d["secondary_offset"] = self.secondary_offset
            d["secondary_gain"] = self.secondary_gain
        if self.kind == "intermittent":
            d["on_ms"] = self.on_ms
            d["off_ms"] = self.off_ms
        if self.kind == "double_beep":
            d["beep_pattern"] = [[dur, freq] for dur, freq in (self.beep_pattern or DEFAULT_BEEP_PATTERN)]
        if self.kind == "file_bed":
            d["bed_path"] = self.bed_path
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StimulusSpec":
        pattern = d.get("beep_pattern")
        if pattern is not None:
            pattern = tuple((float(dur), None if freq is None else float(freq)) for dur, freq in pattern)
        return cls(
            id=int(d["id"]),
            kind=d["kind"],
            label=d.get("label", ""),
            principal_freq=d.get("principal_freq"),
            secondary_offset=float(d.get("secondary_offset", 90.0)),
            secondary_gain=float(d.get("secondary_gain", 0.5)),
            on_ms=d.get("on_ms"),
            off_ms=d.get("off_ms"),
            beep_pattern=pattern,
            bed_path=d.get("bed_path"),
            normalize=bool(d.get("normalize", True)),
        )


@dataclass(frozen=True)
class NoiseBedSpec:
    """Deterministic surrogate noise bed (same seed, same samples)."""

    kind: str
    seed: int = 0
    gain: float = 1.0

    def __post_init__(self):
        if self.kind not in BED_KINDS:
            raise SignalError(f"unknown bed kind {self.kind!r}")


def _validate_tone_args(freq: float, duration: float, sample_rate: float, amplitude: float):
    if duration <= 0:
        raise SignalError(f"duration must be > 0, got {duration}")
    if sample_rate <= 0:
        raise SignalError(f"sample_rate must be > 0, got {sample_rate}")
    if freq <= 0:
        raise SignalError(f"frequency must be > 0, got {freq}")
    if freq >= sample_rate / 2:
        raise SignalError(f"frequency {freq} Hz at or above Nyquist ({sample_rate / 2} Hz)")
    if amplitude < 0:
        raise SignalError(f"amplitude must be >= 0, got {amplitude}")


def _num_samples(duration: float, sample_rate: float) -> int:
    return int(round(duration * sample_rate))


def _edge_ramp(n: int, sample_rate: float, ramp_ms: float = RAMP_MS) -> np.ndarray:
    """Unity envelope with raised-cosine fades at both ends."""
    env = np.ones(n)
    nr = min(int(round(ramp_ms * 1e-3 * sample_rate)), n // 2)
    if nr > 0:
        fade = 0.5 * (1.0 - np.cos(np.pi * np.arange(nr) / nr))
        env[:nr] = fade
        env[n - nr:] = fade[::-1]
    return env


def synth_pure_tone(freq: float, duration: float, sample_rate: float = DEFAULT_SAMPLE_RATE,
                    amplitude: float = 1.0, edge_ramp: bool = True) -> CalibratedSignal:
    """Continuous sine of exact frequency and amplitude, starting at phase 0."""
    _validate_tone_args(freq, duration, sample_rate, amplitude)
    n = _num_samples(duration, sample_rate)
    t = np.arange(n) / sample_rate
    x = amplitude * np.sin(2.0 * np.pi * freq * t)
    if edge_ramp:
        x *= _edge_ramp(n, sample_rate)
    return CalibratedSignal(sample_rate, x)


def _gate_envelope(n: int, sample_rate: float, on_ms: float, off_ms: float) -> np.ndarray:
    """Cyclic on/off gate starting in the ON state, ramped at every transition."""
    env = np.zeros(n)
    n_on = int(round(on_ms * 1e-3 * sample_rate))
    n_off = int(round(off_ms * 1e-3 * sample_rate))
    nr = int(round(RAMP_MS * 1e-3 * sample_rate))
    start = 0
    while start < n:
        stop = min(start + n_on, n)
        seg = stop - start
        env[start:stop] = _edge_ramp(seg, sample_rate) if seg > 2 * nr else 1.0
        start += n_on + n_off
    return env


def synth_intermittent(freq: float, on_ms: float, off_ms: float, duration: float,
                       sample_rate: float = DEFAULT_SAMPLE_RATE, amplitude: float = 1.0) -> CalibratedSignal:
    """Tone gated by a cyclic on/off pattern, ON at t = 0."""
    if on_ms <= 0 or off_ms <= 0:
        raise SignalError(f"on_ms/off_ms must be > 0, got {on_ms}/{off_ms}")
    tone = synth_pure_tone(freq, duration, sample_rate, amplitude, edge_ramp=False)
    env = _gate_envelope(tone.n_samples, sample_rate, on_ms, off_ms)
    return CalibratedSignal(sample_rate, tone.channel(0) * env)


def synth_combined(freq: float, offset: float = 90.0, secondary_gain: float = 0.5,
                   duration: float = 1.0, sample_rate: float = DEFAULT_SAMPLE_RATE,
                   amplitude: float = 1.0) -> CalibratedSignal:
    """Principal sine plus two secondaries at freq +/- offset, all phase 0."""
    if offset >= freq:
        raise SignalError(f"offset {offset} Hz must stay below the principal {freq} Hz")
    _validate_tone_args(freq + offset, duration, sample_rate, amplitude)
    n = _num_samples(duration, sample_rate)
    t = np.arange(n) / sample_rate
    x = amplitude * (
        np.sin(2.0 * np.pi * freq * t)
        + secondary_gain * np.sin(2.0 * np.pi * (freq - offset) * t)
        + secondary_gain * np.sin(2.0 * np.pi * (freq + offset) * t)
    )
    x *= _edge_ramp(n, sample_rate)
    return CalibratedSignal(sample_rate, x)


def synth_double_beep(pattern: tuple[tuple[float, float | None], ...] | None = None,
                      repetitions: int | None = None, duration: float = 1.49,
                      sample_rate: float = DEFAULT_SAMPLE_RATE, amplitude: float = 1.0) -> CalibratedSignal:
    """Beep/pause pattern repeated from t = 0.

    With ``repetitions=None`` the pattern tiles cyclically over the whole
    duration; with an explicit count the remainder is silence.  Each beep is
    ramped at its boundaries.
    """
    pattern = tuple(pattern) if pattern is not None else DEFAULT_BEEP_PATTERN
    if not pattern:
        raise SignalError("beep pattern must not be empty")
    pattern_s = sum(dur for dur, _ in pattern) * 1e-3
    if pattern_s <= 0:
        raise SignalError("beep pattern durations must sum > 0")
    for _, freq in pattern:
        if freq is not None:
            _validate_tone_args(freq, duration, sample_rate, amplitude)

    n = _num_samples(duration, sample_rate)
    x = np.zeros(n)
    limit = duration if repetitions is None else min(duration, repetitions * pattern_s)
    t0 = 0.0
    idx = 0
    while t0 < limit - 1e-12:
        dur_ms, freq = pattern[idx % len(pattern)]
        seg_s = dur_ms * 1e-3
        a = int(round(t0 * sample_rate))
        b = min(int(round((t0 + seg_s) * sample_rate)), n)
        if freq is not None and b > a:
            tt = np.arange(b - a) / sample_rate
            seg = amplitude * np.sin(2.0 * np.pi * freq * tt)
            seg *= _edge_ramp(b - a, sample_rate)
            x[a:b] = seg
        t0 += seg_s
        idx += 1
    return CalibratedSignal(sample_rate, x)


def _shaped_noise(shape_fn, seed: int, duration: float, sample_rate: float) -> np.ndarray:
    """White Gaussian noise coloured by ``shape_fn(freqs) -> linear magnitude``."""
    n = _num_samples(duration, sample_rate)
    rng = np.random.Generator(np.random.PCG64(seed))
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, 1.0 / sample_rate)
    spectrum *= shape_fn(freqs)
    x = np.fft.irfft(spectrum, n=n)
    rms = np.sqrt(np.mean(x**2))
    if rms > 0:
        x /= rms
    return x


def _tyre_shape(freqs: np.ndarray) -> np.ndarray:
    # broadband hump around 1 kHz, rolling off fast above; negligible power > 3 kHz
    mag = 1.0 / (1.0 + (freqs / 1000.0) ** 4)
    mag *= freqs / (freqs + 60.0)  # thin out the lowest octaves
    return mag


def _background_shape(freqs: np.ndarray) -> np.ndarray:
    # quiet-street ambience: low-frequency weighted, mostly below 1 kHz
    with np.errstate(divide="ignore"):
        mag = 1.0 / (1.0 + (freqs / 400.0) ** 2)
    mag *= freqs / (freqs + 30.0)
    return mag


def synth_noise_bed(spec: NoiseBedSpec, duration: float,
                    sample_rate: float = DEFAULT_SAMPLE_RATE) -> CalibratedSignal:
    """Deterministic surrogate bed at a nominal 60 dB L_p,eq before ``spec.gain``.

    ``tyre_surrogate`` and ``background_surrogate`` are spectrally shaped so
    at least 90 % of their power sits below 3 kHz; ``engine_surrogate`` adds
    a low-frequency harmonic stack over the noise floor.
    """
    if duration <= 0:
        raise SignalError(f"duration must be > 0, got {duration}")
    if spec.kind == "tyre_surrogate":
        x = _shaped_noise(_tyre_shape, spec.seed, duration, sample_rate)
    elif spec.kind == "background_surrogate":
        x = _shaped_noise(_background_shape, spec.seed, duration, sample_rate)
    else:  # engine_surrogate
        x = _engine_surrogate(spec.seed, duration, sample_rate)
    base_rms = P_REF * 10.0 ** (60.0 / 20.0)
    return CalibratedSignal(sample_rate, x * base_rms * spec.gain)


def _engine_surrogate(seed: int, duration: float, sample_rate: float) -> np.ndarray:
    """Idling-engine-like surrogate: harmonics of a low firing rate plus noise."""
    n = _num_samples(duration, sample_rate)
    t = np.arange(n) / sample_rate
    rng = np.random.Generator(np.random.PCG64(seed))
    f0 = 26.0
    x = np.zeros(n)
    k = 1
    while k * f0 < 1600.0:
        phase = rng.uniform(0.0, 2.0 * np.pi)
        x += np.sin(2.0 * np.pi * k * f0 * t + phase) / k**0.8
        k += 1
    x /= np.sqrt(np.mean(x**2))
    noise = _shaped_noise(_tyre_shape, seed + 1, duration, sample_rate)
    x = x + 10.0 ** (-10.0 / 20.0) * noise  # noise floor 10 dB under the stack
    # slow cyclic unevenness typical of combustion at idle
    x *= 1.0 + 0.15 * np.sin(2.0 * np.pi * (f0 / 2.0) * t)
    return x / np.sqrt(np.mean(x**2))


def lp_eq_a(signal: CalibratedSignal) -> float:
    """A-weighted equivalent level over the full duration (dBA)."""
    weighted = a_weight(signal)
    power = float(np.mean(weighted.samples**2))
    if power <= 0.0:
        raise SignalError("cannot compute a level for an all-zero signal")
    return 10.0 * np.log10(power / P_REF**2)


def normalization_scale(signal: CalibratedSignal, target_dba: float) -> float:
    """Scalar that brings the signal's full-duration L_p,A,eq to ``target_dba``."""
    return 10.0 ** ((target_dba - lp_eq_a(signal)) / 20.0)


def normalize_to_level(signal: CalibratedSignal, target_dba: float = 65.0) -> CalibratedSignal:
    """Scale the whole signal so its A-weighted L_eq equals ``target_dba``.

    A single scalar is applied, so the relative spectral and temporal
    structure is untouched.  All-zero input is an error.
    """
    return signal.scaled(normalization_scale(signal, target_dba))


def builtin_catalogue(diesel_path: str | None = None) -> list[StimulusSpec]:
    """The fifteen-stimulus catalogue.

    Stimulus 14 uses ``diesel_path`` when given, otherwise the deterministic
    engine surrogate.  Stimulus 15 carries no synthetic source (tyre noise
    and background only) and is exempt from level normalization.
    """
    specs: list[StimulusSpec] = []
    freqs = [350.0, 500.0, 1000.0, 2000.0]
    for i, f in enumerate(freqs):
        specs.append(StimulusSpec(id=i + 1, kind="pure", principal_freq=f,
                                  label=f"Pure tone, continuous, {f:.0f} Hz"))
    for i, f in enumerate(freqs):
        specs.append(StimulusSpec(id=i + 5, kind="intermittent", principal_freq=f,
                                  on_ms=500.0, off_ms=500.0,
                                  label=f"Pure tone, intermittent, {f:.0f} Hz"))
    for i, f in enumerate(freqs):
        specs.append(StimulusSpec(id=i + 9, kind="combined", principal_freq=f,
                                  label=f"Combined tone, continuous, {f:.0f} Hz (+/-90 Hz)"))
    specs.append(StimulusSpec(id=13, kind="double_beep", beep_pattern=DEFAULT_BEEP_PATTERN,
                              label="Double beeps, 1800-1900 Hz"))
    specs.append(StimulusSpec(id=14, kind="file_bed", bed_path=diesel_path,
                              label="Diesel engine" if diesel_path else "Engine surrogate"))
    specs.append(StimulusSpec(id=15, kind="silence", normalize=False, label="Tyres on asphalt"))
    return specs


def synth_stimulus_source(spec: StimulusSpec, duration: float,
                          sample_rate: float = DEFAULT_SAMPLE_RATE,
                          amplitude: float = 0.02) -> CalibratedSignal:
    """Render the synthetic source waveform for one catalogue entry.

    The level is nominal; the pass-by pipeline normalizes at the observer.
    ``file_bed`` entries are loaded (and resampled) by the caller; here a
    missing path falls back to the engine surrogate so the full catalogue
    stays renderable without third-party recordings.
    """
    if spec.kind == "pure":
        return synth_pure_tone(spec.principal_freq, duration, sample_rate, amplitude)
    if spec.kind == "intermittent":
        return synth_intermittent(spec.principal_freq, spec.on_ms, spec.off_ms,
                                  duration, sample_rate, amplitude)
    if spec.kind == "combined":
        return synth_combined(spec.principal_freq, spec.secondary_offset, spec.secondary_gain,
                              duration, sample_rate, amplitude)
    if spec.kind == "double_beep":
        return synth_double_beep(spec.beep_pattern, None, duration, sample_rate, amplitude)
    if spec.kind == "file_bed":
        if spec.bed_path is None:
            return synth_noise_bed(NoiseBedSpec("engine_surrogate", seed=1400 + spec.id),
                                   duration, sample_rate)
        raise SignalError("file beds are loaded by the pipeline, not synthesized")
    # silence: no synthetic source
    return CalibratedSignal(sample_rate, np.zeros(_num_samples(duration, sample_rate)))
