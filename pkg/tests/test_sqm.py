"""Sound-quality metric tests: loudness, sharpness, tonality, modulation metrics.

Each metric is anchored on the classic reference signal for its unit and the
anchor values are frozen so that refactors cannot silently shift the scales.
"""

import numpy as np
import pytest

from evsound.signal import CalibratedSignal, P_REF, SignalError, amplitude_for_level
from evsound.sqm import (
    SqmTrace,
    fluctuation_trace,
    percentile_exceeded,
    psychoacoustic_annoyance,
    roughness_trace,
    sharpness_trace,
    stationary_loudness,
    time_varying_loudness,
    tonality_trace,
)
from evsound.sqm.loudness import band_levels_stationary

FS = 48000.0


def sine(level_db, dur=3.0, freq=1000.0):
    t = np.arange(int(dur * FS)) / FS
    return CalibratedSignal(FS, amplitude_for_level(level_db) * np.sin(2 * np.pi * freq * t))


def am_tone(level_db, fm, dur):
    """1 kHz carrier with full sinusoidal amplitude modulation at ``fm`` Hz.

    The 1/sqrt(1.5) factor keeps the long-term RMS at ``level_db``.
    """
    t = np.arange(int(dur * FS)) / FS
    a = amplitude_for_level(level_db)
    carrier = np.sin(2 * np.pi * 1000.0 * t)
    return CalibratedSignal(FS, a * carrier * (1.0 + np.sin(2 * np.pi * fm * t)) / np.sqrt(1.5))


def narrowband_noise(level_db, dur=3.0, lo=920.0, hi=1080.0, seed=0):
    """Gaussian noise band-limited to one critical band around 1 kHz."""
    n = int(dur * FS)
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal(n)
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, 1.0 / FS)
    spec[(freqs < lo) | (freqs > hi)] = 0.0
    x = np.fft.irfft(spec, n)
    x *= P_REF * 10.0 ** (level_db / 20.0) / np.sqrt(np.mean(x**2))
    return CalibratedSignal(FS, x)


def white_noise(level_db, dur=3.0, seed=3):
    rng = np.random.Generator(np.random.PCG64(seed))
    x = rng.standard_normal(int(dur * FS))
    x *= P_REF * 10.0 ** (level_db / 20.0) / np.sqrt(np.mean(x**2))
    return CalibratedSignal(FS, x)


# --- loudness ---------------------------------------------------------------


def test_loudness_anchor_40db_tone():
    # the unit definition: 1 kHz at 40 dB is one sone
    n5 = time_varying_loudness(sine(40.0)).exceeded()
    assert n5 == pytest.approx(1.0, rel=0.05)
    assert n5 == pytest.approx(0.97998, abs=1e-4)  # frozen


def test_loudness_trace_unit_and_times():
    trace = time_varying_loudness(sine(60.0, dur=2.0))
    assert trace.unit == "sone"
    assert trace.times[0] >= 0.0
    assert np.all(np.diff(trace.times) > 0.0)
    assert trace.times[-1] <= 2.0


def test_loudness_grows_with_level():
    levels = [time_varying_loudness(sine(lv)).exceeded() for lv in (40.0, 55.0, 70.0)]
    assert levels[0] < levels[1] < levels[2]


def test_stationary_loudness_doubles_per_10db():
    # +10 dB at 1 kHz should roughly double the loudness in sone
    totals = []
    for lv in (40.0, 50.0, 60.0, 70.0, 80.0):
        total, specific = stationary_loudness(band_levels_stationary(sine(lv)))
        assert specific.ndim == 1
        totals.append(total)
    for lo, hi in zip(totals, totals[1:]):
        assert 1.8 <= hi / lo <= 2.2
    assert totals[0] == pytest.approx(0.927, abs=0.01)  # frozen
    assert totals[-1] == pytest.approx(13.965, abs=0.05)  # frozen


def test_loudness_of_silence_is_zero():
    trace = time_varying_loudness(CalibratedSignal(FS, np.zeros(int(FS))))
    assert trace.exceeded() == pytest.approx(0.0, abs=1e-6)


# --- sharpness --------------------------------------------------------------


def test_sharpness_anchor_narrowband_1khz():
    # narrowband noise one critical band wide at 1 kHz defines 1 acum
    s5 = sharpness_trace(narrowband_noise(60.0)).exceeded()
    assert s5 == pytest.approx(1.0, rel=0.05)
    assert s5 == pytest.approx(1.03165, abs=1e-3)  # frozen


def test_sharpness_increases_with_centre_frequency():
    low = sharpness_trace(sine(65.0, freq=350.0)).exceeded()
    mid = sharpness_trace(sine(65.0, freq=1000.0)).exceeded()
    high = sharpness_trace(sine(65.0, freq=4000.0)).exceeded()
    assert low < mid < high


def test_sharpness_unit():
    assert sharpness_trace(sine(60.0, dur=1.5)).unit == "acum"


# --- tonality ---------------------------------------------------------------


def test_tonality_anchor_pure_tone():
    # 1 kHz sine at 60 dB defines one tonality unit
    k5 = tonality_trace(sine(60.0)).exceeded()
    assert k5 == pytest.approx(1.0, rel=0.10)
    assert k5 == pytest.approx(0.99998, abs=1e-3)  # frozen


def test_tonality_of_white_noise_is_small():
    k5 = tonality_trace(white_noise(70.0)).exceeded()
    assert k5 < 0.1
    assert k5 == pytest.approx(0.03128, abs=0.005)  # frozen


def test_tonality_tone_in_noise_between_extremes():
    tone = sine(65.0)
    noise = white_noise(65.0)
    mixed = CalibratedSignal(FS, tone.samples + noise.samples)
    k_mixed = tonality_trace(mixed).exceeded()
    assert tonality_trace(noise).exceeded() < k_mixed < tonality_trace(tone).exceeded()


# --- roughness --------------------------------------------------------------


def test_roughness_anchor_70hz_am():
    # 1 kHz at 60 dB, fully modulated at 70 Hz, defines 1 asper
    r5 = roughness_trace(am_tone(60.0, 70.0, 3.0)).exceeded()
    assert r5 == pytest.approx(1.0, rel=0.15)
    assert r5 == pytest.approx(1.0, abs=1e-6)  # frozen calibration point


def test_roughness_of_pure_tone_is_negligible():
    assert roughness_trace(sine(70.0)).exceeded() < 1e-6


def test_roughness_peaks_near_70hz_modulation():
    r20 = roughness_trace(am_tone(60.0, 20.0, 3.0)).exceeded()
    r70 = roughness_trace(am_tone(60.0, 70.0, 3.0)).exceeded()
    r150 = roughness_trace(am_tone(60.0, 150.0, 3.0)).exceeded()
    assert r70 > r20
    assert r70 > r150


def test_roughness_unit():
    assert roughness_trace(am_tone(60.0, 70.0, 1.5)).unit == "asper"


# --- fluctuation strength ---------------------------------------------------


def test_fluctuation_anchor_4hz_am():
    # 1 kHz at 70 dB, fully modulated at 4 Hz, defines 1 vacil
    fs5 = fluctuation_trace(am_tone(70.0, 4.0, 5.0)).exceeded()
    assert fs5 == pytest.approx(1.0, rel=0.15)
    assert fs5 == pytest.approx(1.0, abs=1e-6)  # frozen calibration point


def test_fluctuation_of_pure_tone_is_negligible():
    assert fluctuation_trace(sine(70.0, dur=5.0)).exceeded() < 1e-6


def test_fluctuation_peaks_near_4hz_modulation():
    f1 = fluctuation_trace(am_tone(70.0, 1.0, 6.0)).exceeded()
    f4 = fluctuation_trace(am_tone(70.0, 4.0, 6.0)).exceeded()
    f16 = fluctuation_trace(am_tone(70.0, 16.0, 6.0)).exceeded()
    assert f4 > f1
    assert f4 > f16


def test_fluctuation_unit():
    assert fluctuation_trace(am_tone(70.0, 4.0, 3.0)).unit == "vacil"


# --- trace statistics -------------------------------------------------------


def test_percentile_exceeded_matches_quantile():
    values = np.arange(101.0)
    assert percentile_exceeded(values, 0.05) == pytest.approx(95.0)
    assert percentile_exceeded(values, 0.50) == pytest.approx(50.0)


def test_percentile_exceeded_interpolates():
    values = np.array([0.0, 1.0])
    assert percentile_exceeded(values, 0.25) == pytest.approx(0.75)


def test_percentile_exceeded_rejects_bad_input():
    with pytest.raises(SignalError):
        percentile_exceeded(np.array([]))
    with pytest.raises(SignalError):
        percentile_exceeded(np.array([1.0]), fraction=0.0)
    with pytest.raises(SignalError):
        percentile_exceeded(np.array([1.0]), fraction=1.0)


def test_trace_exceeded_skips_warmup():
    # large values inside the first half second must not leak into the statistic
    times = np.arange(200) * 0.01
    values = np.where(times < 0.5, 100.0, 1.0)
    trace = SqmTrace(times, values, "sone")
    assert trace.exceeded(0.05) == pytest.approx(1.0)
    assert trace.exceeded(0.05, skip=0.0) == pytest.approx(100.0)


def test_trace_after_and_shape_check():
    trace = SqmTrace(np.array([0.0, 1.0, 2.0]), np.array([1.0, 2.0, 3.0]), "acum")
    tail = trace.after(1.0)
    assert tail.values.tolist() == [2.0, 3.0]
    with pytest.raises(SignalError):
        SqmTrace(np.array([0.0, 1.0]), np.array([1.0]), "sone")


# --- combined annoyance index ------------------------------------------------


def test_annoyance_zero_loudness_scores_zero():
    assert psychoacoustic_annoyance(0.0, 2.0, 1.0, 1.0, 1.0) == 0.0


def test_annoyance_reduces_to_loudness_when_other_terms_vanish():
    # sharpness below the pivot and no tonality/roughness/fluctuation
    assert psychoacoustic_annoyance(5.0, 1.2, 0.0, 0.0, 0.0) == pytest.approx(5.0)


def test_annoyance_frozen_spot_value():
    pa = psychoacoustic_annoyance(10.0, 2.0, 0.5, 1.0, 1.0)
    assert pa == pytest.approx(21.15242, abs=1e-4)


def test_annoyance_monotone_in_each_component():
    base = psychoacoustic_annoyance(8.0, 2.0, 0.4, 0.5, 0.3)
    assert psychoacoustic_annoyance(9.0, 2.0, 0.4, 0.5, 0.3) > base
    assert psychoacoustic_annoyance(8.0, 2.4, 0.4, 0.5, 0.3) > base
    assert psychoacoustic_annoyance(8.0, 2.0, 0.6, 0.5, 0.3) > base
    assert psychoacoustic_annoyance(8.0, 2.0, 0.4, 0.7, 0.3) > base
    assert psychoacoustic_annoyance(8.0, 2.0, 0.4, 0.5, 0.5) > base


def test_annoyance_rejects_negative_and_nonfinite_inputs():
    with pytest.raises(SignalError):
        psychoacoustic_annoyance(-1.0, 1.0, 0.0, 0.0, 0.0)
    with pytest.raises(SignalError):
        psychoacoustic_annoyance(1.0, float("nan"), 0.0, 0.0, 0.0)
