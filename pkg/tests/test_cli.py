"""Command-line workflows: synth -> metrics -> analyze / spectrogram / session."""

import csv
import json

import numpy as np
import pytest

from evsound import cli
from evsound.levels import spectrogram
from evsound.manifest import TRAINING_STIMULUS_ID, load_manifest, trial_order
from evsound.study import METRIC_COLUMNS, TABLE_METRICS
from evsound.wavio import read_wav


@pytest.fixture(scope="module")
def analysis(bundle, demo_ratings_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("analysis")
    rc = cli.main(["analyze", "--metrics", str(bundle / "metrics.csv"),
                   "--ratings", str(demo_ratings_path), "--out", str(out)])
    assert rc == 0
    return out


# --- synth -------------------------------------------------------------------


def test_synth_writes_expected_inventory(bundle):
    for i in range(1, 16):
        assert (bundle / f"stimulus_{i:02d}_mono.wav").exists()
        assert (bundle / f"stimulus_{i:02d}_stereo.wav").exists()
    assert (bundle / "synthesis.json").exists()


def test_synthesis_manifest_contents(bundle):
    doc = json.loads((bundle / "synthesis.json").read_text())
    assert doc["kind"] == "synthesis"
    assert doc["seed"] == 0
    assert doc["sample_rate"] == 48000.0
    assert doc["pa_per_full_scale"] == 20.0
    assert set(doc["trajectory"]) == {"x_start", "x_end", "y", "speed", "sound_speed"}
    assert [e["id"] for e in doc["stimuli"]] == list(range(1, 16))
    for entry in doc["stimuli"]:
        assert entry["duration"] == pytest.approx(14.4, abs=0.01)
        if entry["spec"]["normalize"]:
            assert entry["l_p_a_eq"] == pytest.approx(65.0, abs=0.01)
        else:
            assert entry["l_p_a_eq"] < 60.0


def test_synth_audio_formats(bundle):
    mono = read_wav(bundle / "stimulus_01_mono.wav")
    stereo = read_wav(bundle / "stimulus_01_stereo.wav")
    assert mono.channels == 1
    assert stereo.channels == 2
    assert mono.sample_rate == stereo.sample_rate == 48000.0


# --- metrics -------------------------------------------------------------------


def test_metrics_csv_layout(bundle):
    with open(bundle / "metrics.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["stimulus_id"] + METRIC_COLUMNS
    assert len(rows) == 16
    # repr() cells round-trip to float exactly
    loaded = cli.load_metrics(bundle / "metrics.csv")
    assert loaded[0].L_p_A_eq == float(rows[1][rows[0].index("L_p_A_eq")])


def test_metrics_json_matches_csv(bundle, metric_rows, tmp_path):
    rc = cli.main(["metrics", "--audio", str(bundle), "--out", str(tmp_path),
                   "--format", "json"])
    assert rc == 0
    from_json = cli.load_metrics(tmp_path / "metrics.json")
    for a, b in zip(metric_rows, from_json):
        for name in METRIC_COLUMNS:
            assert a.value(name) == pytest.approx(b.value(name), rel=1e-12)


def test_metrics_missing_audio_file(bundle, tmp_path, capsys):
    doc = json.loads((bundle / "synthesis.json").read_text())
    doc["stimuli"][0]["mono_file"] = "gone.wav"
    manifest = tmp_path / "synthesis.json"
    manifest.write_text(json.dumps(doc))
    rc = cli.main(["metrics", "--audio", str(bundle), "--manifest", str(manifest),
                   "--out", str(tmp_path)])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "SignalError"
    assert "gone.wav" in err["message"]


def test_metrics_without_manifest(tmp_path, capsys):
    rc = cli.main(["metrics", "--audio", str(tmp_path), "--out", str(tmp_path)])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert "synthesis manifest" in err["message"]


# --- analyze -------------------------------------------------------------------


def test_analyze_correlation_table(analysis):
    with open(analysis / "correlation.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["metric"] for r in rows] == TABLE_METRICS
    by_name = {r["metric"]: r for r in rows}
    pa = by_name["PA"]
    assert int(pa["n"]) == 13
    assert float(pa["rho"]) > 0.9  # ratings were synthesized to track PA
    assert float(pa["p_value"]) < 1e-4
    assert pa["significant"] == "true"


def test_analyze_box_stats(analysis):
    with open(analysis / "box_stats.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [int(r["stimulus_id"]) for r in rows] == list(range(1, 16))
    for r in rows:
        assert int(r["n"]) == 14
        assert 0.0 <= float(r["median"]) <= 10.0
        assert float(r["q25"]) <= float(r["median"]) <= float(r["q75"])


def test_analyze_fit_and_scatter(analysis):
    fit = json.loads((analysis / "fit.json").read_text())
    assert fit["metric"] == "PA"
    assert fit["stimulus_ids"] == list(range(1, 14))
    assert fit["slope"] > 0.0
    assert fit["residual_sum"] == pytest.approx(0.0, abs=1e-9)
    assert fit["rms_error"] < 2.0
    with open(analysis / "scatter.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 13
    assert all(float(r["std"]) >= 0.0 for r in rows)


def test_analyze_writes_figures(analysis):
    for name in ("fig_boxplot.png", "fig_scatter.png"):
        data = (analysis / name).read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
        assert len(data) > 5000


def test_analyze_json_format(bundle, demo_ratings_path, tmp_path):
    rc = cli.main(["analyze", "--metrics", str(bundle / "metrics.csv"),
                   "--ratings", str(demo_ratings_path), "--out", str(tmp_path),
                   "--format", "json"])
    assert rc == 0
    table = json.loads((tmp_path / "correlation.json").read_text())
    assert [row["metric"] for row in table] == TABLE_METRICS
    box = json.loads((tmp_path / "box_stats.json").read_text())
    assert len(box) == 15


def test_analyze_custom_exclusion(bundle, demo_ratings_path, tmp_path):
    rc = cli.main(["analyze", "--metrics", str(bundle / "metrics.csv"),
                   "--ratings", str(demo_ratings_path), "--out", str(tmp_path),
                   "--exclude", "1,2,14,15"])
    assert rc == 0
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert fit["stimulus_ids"] == list(range(3, 14))


def test_analyze_bad_exclude(bundle, demo_ratings_path, tmp_path, capsys):
    rc = cli.main(["analyze", "--metrics", str(bundle / "metrics.csv"),
                   "--ratings", str(demo_ratings_path), "--out", str(tmp_path),
                   "--exclude", "1,two"])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "RatingsError"


def test_analyze_ratings_for_unknown_stimulus(bundle, tmp_path, capsys):
    ratings = tmp_path / "r.csv"
    ratings.write_text(
        "participant_id,stimulus_id,annoyance,noticeability,informativeness\n"
        "P01,1,5,5,5\n")
    metrics = cli.load_metrics(bundle / "metrics.csv")[:3]
    trimmed = tmp_path / "metrics.json"
    trimmed.write_text(json.dumps([m.to_dict() for m in metrics[1:]]))
    rc = cli.main(["analyze", "--metrics", str(trimmed), "--ratings", str(ratings),
                   "--out", str(tmp_path)])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert "without metrics" in err["message"]


# --- spectrogram ----------------------------------------------------------------


def test_spectrogram_outputs_match_computation(bundle, tmp_path):
    wav = bundle / "stimulus_12_mono.wav"
    rc = cli.main(["spectrogram", str(wav), "--out", str(tmp_path),
                   "--n-fft", "1024", "--overlap", "0.5"])
    assert rc == 0
    csv_path = tmp_path / "stimulus_12_mono_spectrogram.csv"
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    ref = spectrogram(read_wav(wav), n_fft=1024, overlap=0.5)
    times = np.array([float(t) for t in rows[0][1:]])
    freqs = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    assert np.array_equal(times, ref.times)
    assert np.array_equal(freqs, ref.freqs)
    assert np.array_equal(values, ref.levels_db)
    png = (tmp_path / "stimulus_12_mono_spectrogram.png").read_bytes()
    assert png[:8] == b"\x89PNG\r\n\x1a\n"


def test_spectrogram_missing_file(tmp_path, capsys):
    rc = cli.main(["spectrogram", str(tmp_path / "none.wav"), "--out", str(tmp_path)])
    assert rc == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] in ("FileNotFoundError", "WavError", "OSError")


# --- session ---------------------------------------------------------------------


def test_session_bundle(bundle, tmp_path):
    rc = cli.main(["session", "--audio", str(bundle), "--out", str(tmp_path),
                   "--seed", "3", "--session-id", "s-demo"])
    assert rc == 0
    doc = load_manifest(tmp_path / "manifest.json")  # validates the schema
    assert doc["session_id"] == "s-demo"
    assert doc["trials"][0]["stimulus_id"] == TRAINING_STIMULUS_ID
    assert [t["stimulus_id"] for t in doc["trials"][1:]] == trial_order(3)
    for trial in doc["trials"]:
        audio = tmp_path / trial["audio_file"]
        assert audio.exists()
        src = bundle / audio.name
        assert audio.read_bytes() == src.read_bytes()


def test_session_missing_stereo_file(bundle, tmp_path, capsys):
    doc = json.loads((bundle / "synthesis.json").read_text())
    doc["stimuli"][3]["stereo_file"] = "gone.wav"
    manifest = tmp_path / "synthesis.json"
    manifest.write_text(json.dumps(doc))
    rc = cli.main(["session", "--audio", str(bundle), "--manifest", str(manifest),
                   "--out", str(tmp_path)])
    assert rc == 1
    assert "gone.wav" in json.loads(capsys.readouterr().err)["message"]


# --- shared plumbing --------------------------------------------------------------


def test_out_env_var_is_honoured(bundle, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    rc = cli.main(["spectrogram", str(bundle / "stimulus_01_mono.wav"),
                   "--n-fft", "1024"])
    assert rc == 0
    assert (tmp_path / "stimulus_01_mono_spectrogram.csv").exists()


def test_unknown_subcommand_exits_with_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["frobnicate"])
    assert exc.value.code == 2
