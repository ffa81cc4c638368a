"""Per-stimulus rendering chain and the full metric battery.

One stimulus moves through: source synthesis -> pass-by render -> mixing with
the rolling-noise and ambient beds -> level normalization at the observer ->
binaural stage.  The mono observer signal is the measurement artifact; the
stereo signal is the listening artifact, scaled by the same gains so both
describe the same scene.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
import os

import numpy as np
from scipy.signal import resample_poly

from .levels import lp_eq, lp_max
from .passby import Trajectory, render_passby, stereo_stage
from .pnl import perceived_noise
from .signal import CalibratedSignal, SignalError, mix
from .sqm import (SqmSummary, SqmTrace, fluctuation_trace, psychoacoustic_annoyance,
                  roughness_trace, sharpness_from_specific, specific_loudness_frames,
                  tonality_trace)
from .sqm._modulation import band_envelopes
from .study import MetricSet
from .synth import (DEFAULT_SAMPLE_RATE, NoiseBedSpec, StimulusSpec, normalization_scale,
                    synth_noise_bed, synth_stimulus_source)
from .weighting import a_weight
from .wavio import read_wav

DEFAULT_TARGET_DBA = 65.0

# Component levels at the observer before the final whole-mix normalization.
# The synthetic warning source dominates, the rolling-noise bed sits a few dB
# under it, and the ambient bed only keeps the silences from being digital
# zero.  The final normalization rescales the whole mix, so only the ratios
# between these numbers matter.
TONE_LEVEL_DBA = 63.0
TYRE_LEVEL_DBA = 57.0
BACKGROUND_LEVEL_DBA = 45.0

# Child seeds for the two shared beds, derived from the session seed.
TYRE_SEED_OFFSET = 101
BACKGROUND_SEED_OFFSET = 202

DEFAULT_TRAJECTORY = Trajectory()


@dataclass(frozen=True)
class SceneBeds:
    """The two per-session beds, rendered and scaled once, shared by all
    stimuli: the rolling-noise bed rides the trajectory, the ambient bed is
    static (and presented diotically in the stereo stage)."""

    tyre_mono: CalibratedSignal
    tyre_stereo: CalibratedSignal
    background: CalibratedSignal


@dataclass(frozen=True)
class RenderedStimulus:
    spec: StimulusSpec
    mono: CalibratedSignal
    stereo: CalibratedSignal


def scene_beds(seed: int, trajectory: Trajectory = DEFAULT_TRAJECTORY,
               sample_rate: float = DEFAULT_SAMPLE_RATE) -> SceneBeds:
    duration = trajectory.duration
    tyre_src = synth_noise_bed(NoiseBedSpec("tyre_surrogate", seed + TYRE_SEED_OFFSET),
                               duration, sample_rate)
    tyre_raw = render_passby(tyre_src, trajectory)
    gain = normalization_scale(tyre_raw, TYRE_LEVEL_DBA)
    bg_src = synth_noise_bed(
        NoiseBedSpec("background_surrogate", seed + BACKGROUND_SEED_OFFSET),
        duration, sample_rate)
    bg = bg_src.scaled(normalization_scale(bg_src, BACKGROUND_LEVEL_DBA))
    n = tyre_raw.n_samples
    return SceneBeds(tyre_mono=tyre_raw.scaled(gain),
                     tyre_stereo=stereo_stage(tyre_raw, trajectory).scaled(gain),
                     background=CalibratedSignal(sample_rate, bg.channel(0)[:n]))


def load_file_bed(path: str, sample_rate: float) -> CalibratedSignal:
    """Read a recorded source, downmix to mono, and resample if needed."""
    sig = read_wav(path)
    x = sig.mono().channel(0)
    if sig.sample_rate != sample_rate:
        ratio = Fraction(int(round(sample_rate)), int(round(sig.sample_rate)))
        x = resample_poly(x, ratio.numerator, ratio.denominator)
    return CalibratedSignal(sample_rate, x)


def _fit_length(x: np.ndarray, n: int) -> np.ndarray:
    if x.size >= n:
        return x[:n]
    reps = int(np.ceil(n / x.size))
    return np.tile(x, reps)[:n]


def render_stimulus(spec: StimulusSpec, beds: SceneBeds,
                    trajectory: Trajectory = DEFAULT_TRAJECTORY,
                    target_dba: float = DEFAULT_TARGET_DBA,
                    file_source: CalibratedSignal | None = None) -> RenderedStimulus:
    """Run the full chain for one catalogue entry.

    ``file_source`` feeds ``file_bed`` entries that reference a recording;
    without it the deterministic engine surrogate stands in.  Stimuli with
    ``normalize=False`` keep the natural mix level (the bed-only entry stays
    quieter than the rest by design).
    """
    fs = beds.tyre_mono.sample_rate
    duration = trajectory.duration
    n = beds.tyre_mono.n_samples
    bg_stereo = CalibratedSignal(fs, np.stack([beds.background.channel(0)] * 2))
    mono_parts = [beds.tyre_mono, beds.background]
    stereo_parts = [beds.tyre_stereo, bg_stereo]
    if spec.kind != "silence":
        if spec.kind == "file_bed" and file_source is not None:
            source = CalibratedSignal(fs, _fit_length(file_source.channel(0), n))
        else:
            source = synth_stimulus_source(spec, duration, fs)
        tone_raw = render_passby(source, trajectory)
        tone_gain = normalization_scale(tone_raw, TONE_LEVEL_DBA)
        mono_parts.insert(0, tone_raw.scaled(tone_gain))
        stereo_parts.insert(0, stereo_stage(tone_raw, trajectory).scaled(tone_gain))
    mono_mix = mix(mono_parts)
    final_gain = normalization_scale(mono_mix, target_dba) if spec.normalize else 1.0
    return RenderedStimulus(spec=spec,
                            mono=mono_mix.scaled(final_gain),
                            stereo=mix(stereo_parts).scaled(final_gain))


def render_catalogue(specs: list[StimulusSpec],
                     trajectory: Trajectory = DEFAULT_TRAJECTORY,
                     sample_rate: float = DEFAULT_SAMPLE_RATE,
                     seed: int = 0, target_dba: float = DEFAULT_TARGET_DBA,
                     file_sources: dict[int, CalibratedSignal] | None = None,
                     workers: int | None = None) -> list[RenderedStimulus]:
    """Render every catalogue entry against one shared pair of beds."""
    beds = scene_beds(seed, trajectory, sample_rate)
    sources = file_sources or {}

    def one(spec: StimulusSpec) -> RenderedStimulus:
        return render_stimulus(spec, beds, trajectory, target_dba,
                               file_source=sources.get(spec.id))

    if workers is None:
        workers = min(4, os.cpu_count() or 1)
    if workers <= 1 or len(specs) <= 1:
        return [one(s) for s in specs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, specs))


def sqm_summary(signal: CalibratedSignal) -> SqmSummary:
    """The five 5-percent-exceeded sound-quality values plus the combined
    annoyance index, computed on the mono observer signal."""
    if signal.channels != 1:
        raise SignalError("sound-quality metrics expect the mono observer signal")
    loud, ns = specific_loudness_frames(signal)
    sharp = SqmTrace(times=loud.times, values=sharpness_from_specific(ns), unit="acum")
    envelopes = band_envelopes(signal)
    n5 = loud.exceeded()
    s5 = sharp.exceeded()
    k5 = tonality_trace(signal).exceeded()
    r5 = roughness_trace(signal, envelopes=envelopes).exceeded()
    fs5 = fluctuation_trace(signal, envelopes=envelopes).exceeded()
    return SqmSummary(n5=n5, s5=s5, k5=k5, r5=r5, fs5=fs5,
                      pa=psychoacoustic_annoyance(n5, s5, k5, r5, fs5))


def metric_battery(signal: CalibratedSignal, stimulus_id: int) -> MetricSet:
    """All eleven per-stimulus metrics from the mono observer signal."""
    mono = signal.mono() if signal.channels != 1 else signal
    weighted = a_weight(mono)
    pn = perceived_noise(mono)
    sqm = sqm_summary(mono)
    return MetricSet(stimulus_id=stimulus_id,
                     L_p_max=lp_max(mono),
                     L_p_A_max=lp_max(weighted),
                     L_p_A_eq=lp_eq(weighted),
                     PNLT_max=pn.pnlt_max,
                     EPNL=pn.epnl,
                     N5=sqm.n5, S5=sqm.s5, K5=sqm.k5,
                     R5=sqm.r5, FS5=sqm.fs5, PA=sqm.pa)
