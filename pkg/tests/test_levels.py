import numpy as np
import pytest

from evsound import CalibratedSignal, amplitude_for_level
from evsound.levels import (BAND_CENTERS, BAND_LOWER, BAND_UPPER, FRAME_STEP,
                            LEVEL_FLOOR_DB, lp_eq, lp_max, spectrogram,
                            third_octave_frames)
from evsound.weighting import a_weight

FS = 48000.0


def sine(level, freq=1000.0, duration=2.0):
    t = np.arange(int(duration * FS)) / FS
    return CalibratedSignal(FS, amplitude_for_level(level) * np.sin(2 * np.pi * freq * t))


def test_lp_eq_of_calibrated_sine():
    assert lp_eq(sine(60.0)) == pytest.approx(60.0, abs=0.01)
    assert lp_eq(sine(94.0)) == pytest.approx(94.0, abs=0.01)


def test_lp_eq_weighted_composition():
    # 1 kHz: A-weighting is 0 dB, so both levels agree
    assert lp_eq(a_weight(sine(65.0))) == pytest.approx(65.0, abs=0.02)


def test_lp_max_stationary_sine():
    sig = sine(60.0, duration=8.0)
    assert lp_max(sig, 0.125) == pytest.approx(60.0, abs=0.1)
    assert lp_max(sig, 1.0) == pytest.approx(60.0, abs=0.1)


def test_lp_max_fast_tracks_bursts_better():
    t = np.arange(int(3 * FS)) / FS
    x = np.zeros_like(t)
    n0, n1 = int(1.0 * FS), int(1.5 * FS)
    x[n0:n1] = amplitude_for_level(80.0) * np.sin(2 * np.pi * 1000 * t[: n1 - n0])
    burst = CalibratedSignal(FS, x)
    fast = lp_max(burst, 0.125)
    slow = lp_max(burst, 1.0)
    assert fast == pytest.approx(79.92, abs=0.1)
    assert slow == pytest.approx(75.95, abs=0.1)
    assert fast > slow


def test_band_layout():
    assert len(BAND_CENTERS) == 24
    assert BAND_CENTERS[0] == pytest.approx(50.12, abs=0.01)
    assert BAND_CENTERS[-1] == pytest.approx(10000.0, abs=0.01)
    # edges meet: upper of band k equals lower of band k+1
    assert np.allclose(BAND_UPPER[:-1], BAND_LOWER[1:], rtol=1e-12)
    # exact base-10 spacing
    assert np.allclose(np.diff(np.log10(BAND_CENTERS)), 0.1, atol=1e-12)


def test_third_octave_frames_capture_tone_in_right_band():
    sig = sine(70.0, freq=1000.0, duration=3.0)
    frames = third_octave_frames(sig)
    assert frames[1].time == pytest.approx(FRAME_STEP, abs=1e-9)
    idx = int(np.argmin(np.abs(BAND_CENTERS - 1000.0)))
    mid = frames[2]
    assert mid.levels[idx] == pytest.approx(70.0, abs=0.3)
    others = np.delete(mid.levels, idx)
    assert np.max(others) < 40.0


def test_third_octave_frame_count():
    sig = sine(60.0, duration=3.0)
    frames = third_octave_frames(sig)
    assert len(frames) == 6


def test_level_floor_applied():
    quiet = CalibratedSignal(FS, np.full(int(FS), 1e-12))
    frames = third_octave_frames(quiet)
    assert np.all(frames[0].levels >= LEVEL_FLOOR_DB - 1e-9)


def test_spectrogram_peak_location_and_shape():
    sig = sine(70.0, freq=2000.0, duration=2.0)
    spec = spectrogram(sig, n_fft=4096, overlap=0.75)
    assert spec.levels_db.shape == (len(spec.freqs), len(spec.times))
    col = spec.levels_db[:, spec.levels_db.shape[1] // 2]
    assert spec.freqs[int(np.argmax(col))] == pytest.approx(2000.0, abs=FS / 4096)


def test_spectrogram_stereo_uses_channel_power_mean():
    mono = sine(70.0, duration=1.0)
    stereo = CalibratedSignal(FS, np.vstack([mono.channel(0), mono.channel(0)]))
    a = spectrogram(mono)
    b = spectrogram(stereo)
    assert np.allclose(a.levels_db, b.levels_db, atol=1e-9)
