"""Acceptance gate: every headline guarantee of the package, one test each.

Run with ``pytest tests/test_acceptance.py -v`` to get one pass/fail line per
guarantee.  The rendered-catalogue checks share the session-scoped bundle
fixtures, so the whole gate costs two catalogue renders plus seconds.
"""

import json
import os
from pathlib import Path

import numpy as np
import pytest

from evsound.passby import Trajectory, render_passby
from evsound.pnl import epnl
from evsound.signal import CalibratedSignal, P_REF, amplitude_for_level
from evsound.sqm import (
    fluctuation_trace,
    roughness_trace,
    sharpness_trace,
    time_varying_loudness,
    tonality_trace,
)
from evsound.study import correlation_table, linear_fit, load_ratings, mean_ratings, pearson
from evsound.synth import lp_eq_a, synth_pure_tone
from evsound.wavio import read_wav
from evsound import cli

FS = 48000.0

DATASET_ENV = "EVSOUND_DATASET"


def _sine(level_db, dur=3.0, freq=1000.0):
    t = np.arange(int(dur * FS)) / FS
    return CalibratedSignal(FS, amplitude_for_level(level_db) * np.sin(2 * np.pi * freq * t))


def _am_tone(level_db, fm, dur=5.0):
    t = np.arange(int(dur * FS)) / FS
    a = amplitude_for_level(level_db)
    carrier = np.sin(2 * np.pi * 1000.0 * t)
    return CalibratedSignal(FS, a * carrier * (1.0 + np.sin(2 * np.pi * fm * t)) / np.sqrt(1.5))


def _narrowband(level_db, dur=3.0):
    n = int(dur * FS)
    rng = np.random.Generator(np.random.PCG64(0))
    x = rng.standard_normal(n)
    spec = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, 1.0 / FS)
    spec[(freqs < 920.0) | (freqs > 1080.0)] = 0.0
    x = np.fft.irfft(spec, n)
    x *= P_REF * 10.0 ** (level_db / 20.0) / np.sqrt(np.mean(x**2))
    return CalibratedSignal(FS, x)


def _stft_peak_hz(x, sample_rate):
    """Peak frequency via Hann window, 4x zero-padding, quadratic interpolation."""
    w = np.hanning(x.size)
    spec = np.abs(np.fft.rfft(x * w, n=4 * x.size))
    k = int(np.argmax(spec))
    a, b, c = spec[k - 1], spec[k], spec[k + 1]
    delta = 0.5 * (a - c) / (a - 2 * b + c)
    return (k + delta) * sample_rate / (4 * x.size)


# --- rendering ---------------------------------------------------------------


def test_render_duration_is_14_4_seconds(bundle):
    assert Trajectory().duration == pytest.approx(14.40, abs=0.01)
    doc = json.loads((bundle / "synthesis.json").read_text())
    for entry in doc["stimuli"]:
        assert entry["duration"] == pytest.approx(14.40, abs=0.01)


def test_all_normalized_stimuli_measure_65_dba(bundle):
    doc = json.loads((bundle / "synthesis.json").read_text())
    for entry in doc["stimuli"]:
        level = lp_eq_a(read_wav(bundle / entry["mono_file"]))
        if entry["spec"]["normalize"]:
            assert level == pytest.approx(65.00, abs=0.01), entry["id"]
        else:
            assert level < 60.0, entry["id"]


def test_doppler_shift_endpoints_of_rendered_1khz_tone():
    source = synth_pure_tone(1000.0, Trajectory().duration, FS,
                             amplitude=amplitude_for_level(70.0))
    rendered = render_passby(source, Trajectory())
    x = rendered.channel(0)
    n = int(FS)
    f_start = _stft_peak_hz(x[:n], FS)
    f_end = _stft_peak_hz(x[-n:], FS)
    assert f_start == pytest.approx(1024.9, abs=1.0)
    assert f_end == pytest.approx(976.3, abs=1.0)


# --- metric unit anchors -----------------------------------------------------


def test_unit_anchor_sone():
    assert time_varying_loudness(_sine(40.0)).exceeded() == pytest.approx(1.0, rel=0.05)


def test_unit_anchor_acum():
    assert sharpness_trace(_narrowband(60.0)).exceeded() == pytest.approx(1.0, rel=0.05)


def test_unit_anchor_asper():
    assert roughness_trace(_am_tone(60.0, 70.0, dur=3.0)).exceeded() == pytest.approx(
        1.0, rel=0.15)


def test_unit_anchor_vacil():
    assert fluctuation_trace(_am_tone(60.0, 4.0, dur=5.0)).exceeded() == pytest.approx(
        1.0, rel=0.15)


def test_unit_anchor_tonality():
    assert tonality_trace(_sine(60.0)).exceeded() == pytest.approx(1.0, rel=0.10)


def test_sharpness_orders_pure_tones_by_frequency(bundle, metric_rows):
    doc = json.loads((bundle / "synthesis.json").read_text())
    by_id = {m.stimulus_id: m for m in metric_rows}
    pure = sorted((e["spec"]["principal_freq"], by_id[e["id"]].S5)
                  for e in doc["stimuli"] if e["spec"]["kind"] == "pure")
    assert len(pure) == 4
    sharpness = [s for _, s in pure]
    assert sharpness == sorted(sharpness)
    assert len(set(sharpness)) == 4  # strictly increasing


# --- perceived-noise properties ----------------------------------------------


def test_epnl_duration_and_threshold_properties():
    steady = np.full(40, 92.0)  # 20 s of frames at 0.5 s steps
    doubled = np.full(80, 92.0)
    assert epnl(doubled) - epnl(steady) == pytest.approx(3.01, abs=0.05)

    quiet_tail = np.concatenate([steady, np.full(30, 92.0 - 10.5)])
    assert epnl(quiet_tail) == pytest.approx(epnl(steady), abs=1e-9)


# --- statistics ---------------------------------------------------------------


def test_statistics_pearson_and_least_squares():
    x = np.arange(10.0)
    assert pearson(x, 3.0 * x + 2.0).rho == 1.0
    assert pearson(x, -x).rho == -1.0

    # sample correlation of exactly 0.8866 with n = 13
    rho = 0.8866
    u = np.arange(13.0)
    u -= u.mean()
    u /= np.linalg.norm(u)
    v = np.arange(13.0) ** 2
    v -= v.mean()
    v -= (v @ u) * u
    v /= np.linalg.norm(v)
    result = pearson(u, rho * u + np.sqrt(1.0 - rho**2) * v)
    assert result.rho == pytest.approx(rho, abs=1e-12)
    assert round(result.p_value, 4) == 0.0001

    rng = np.random.Generator(np.random.PCG64(2))
    xs = rng.uniform(0.0, 30.0, 13)
    ys = 0.4 * xs + rng.standard_normal(13)
    _, _, residuals = linear_fit(xs, ys)
    assert abs(float(np.sum(residuals))) < 1e-9


# --- published listening-test data -------------------------------------------


@pytest.mark.skipif(DATASET_ENV not in os.environ,
                    reason=f"set {DATASET_ENV} to the published ratings CSV to enable")
def test_published_ratings_reproduction(metric_rows):
    records = load_ratings(os.environ[DATASET_ENV])
    means = mean_ratings(records)

    def pooled(ids):
        values = [float(r.annoyance) for r in records if r.stimulus_id in ids]
        return float(np.mean(values))

    assert pooled(range(1, 5)) == pytest.approx(5.4, abs=0.1)          # pure tones
    assert pooled(range(5, 13)) == pytest.approx(4.8, abs=0.1)         # intermittent+combined
    assert pooled({15}) == pytest.approx(1.0, abs=0.5)                 # bed only

    table = correlation_table(metric_rows, means)
    by_rho = sorted(table, key=lambda c: c.rho, reverse=True)
    assert by_rho[0].metric == "PA"
    assert 0.80 <= by_rho[0].rho <= 0.95
    # recorded, not gating: which metrics fall out of significance
    weak = sorted(c.metric for c in table if not c.significant)
    print(f"non-significant metrics with surrogate beds: {weak}")


# --- determinism ---------------------------------------------------------------


def test_repeated_runs_are_byte_identical(bundle, bundle_rerun, demo_ratings_path,
                                          tmp_path_factory):
    names = sorted(p.name for p in bundle.iterdir())
    assert names == sorted(p.name for p in bundle_rerun.iterdir())
    for name in names:
        assert (bundle / name).read_bytes() == (bundle_rerun / name).read_bytes(), name

    outs = []
    for tag in ("a", "b"):
        out = tmp_path_factory.mktemp(f"det_{tag}")
        rc = cli.main(["analyze", "--metrics", str(bundle / "metrics.csv"),
                       "--ratings", str(demo_ratings_path), "--out", str(out)])
        assert rc == 0
        outs.append(out)
    for name in sorted(p.name for p in outs[0].iterdir()):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


# --- experiment-runner round trip ---------------------------------------------


FRONTEND_FIXTURES = Path(__file__).parent.parent / "frontend" / "fixtures"


@pytest.mark.skipif(not (FRONTEND_FIXTURES / "sample-session-result.json").exists(),
                    reason="runner fixtures not built")
def test_runner_session_result_round_trip():
    result_path = FRONTEND_FIXTURES / "sample-session-result.json"
    manifest_path = FRONTEND_FIXTURES / "sample-manifest.json"
    records = load_ratings(result_path)

    manifest_doc = json.loads(manifest_path.read_text())
    expected_order = [t["stimulus_id"] for t in manifest_doc["trials"] if not t["training"]]
    assert [r.stimulus_id for r in records] == expected_order

    result_doc = json.loads(result_path.read_text())
    scripted = {t["stimulus_id"]: t for t in result_doc.get("_scripted_events", [])}
    checked = 0
    for rec in records:
        script = scripted.get(rec.stimulus_id)
        if script is None:
            continue
        recorded = [t for _, t in rec.keypress_timeline]
        injected = [e["time"] for e in script["events"]]
        assert len(recorded) == len(injected)
        for got, want in zip(recorded, injected):
            assert abs(got - want) <= 0.050
        checked += 1
    assert checked > 0
