"""Command-line interface: synthesize, measure, analyze, plot, and package.

All writes are atomic (temp file + rename) and deterministic: no timestamps,
stable key order, seeded randomness only.  Errors leave a machine-readable
JSON object on stderr and a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import manifest as mf
from . import pipeline, plots
from .levels import spectrogram
from .signal import SignalError
from .study import (DEFAULT_EXCLUDE, METRIC_COLUMNS, MetricSet, RatingsError, describe,
                    correlation_table, linear_fit, load_ratings, mean_ratings)
from .synth import DEFAULT_SAMPLE_RATE, StimulusSpec, builtin_catalogue, lp_eq_a
from .wavio import PA_PER_FULL_SCALE, read_wav, write_wav

OUT_ENV = "EVSOUND_OUT"
SYNTH_MANIFEST = "synthesis.json"


# ---------------------------------------------------------------- file helpers

def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_json(path: Path, doc) -> None:
    _atomic_write(path, (json.dumps(doc, indent=2) + "\n").encode())


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write(path, buf.getvalue().encode())


def _out_dir(args) -> Path:
    out = Path(args.out if args.out else os.environ.get(OUT_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(path: Path) -> None:
    print(f"wrote {path}")


# ------------------------------------------------------------------ subcommands

def _trajectory_dict(traj) -> dict:
    return {"x_start": traj.x_start, "x_end": traj.x_end, "y": traj.y,
            "speed": traj.speed, "sound_speed": traj.sound_speed}


def cmd_synth(args) -> int:
    out = _out_dir(args)
    if args.spec_file:
        with open(args.spec_file) as fh:
            specs = [StimulusSpec.from_dict(d) for d in json.load(fh)]
    else:
        specs = builtin_catalogue(args.diesel_file)
    traj = pipeline.DEFAULT_TRAJECTORY
    sources = {}
    if args.diesel_file:
        sources = {sid: pipeline.load_file_bed(args.diesel_file, args.sample_rate)
                   for sid in (s.id for s in specs if s.kind == "file_bed" and s.bed_path)}
    rendered = pipeline.render_catalogue(specs, traj, args.sample_rate, args.seed,
                                         args.target_dba, file_sources=sources,
                                         workers=args.workers)
    stimuli = []
    for r in rendered:
        mono_name = f"stimulus_{r.spec.id:02d}_mono.wav"
        stereo_name = f"stimulus_{r.spec.id:02d}_stereo.wav"
        write_wav(out / mono_name, r.mono, fmt="float32")
        write_wav(out / stereo_name, r.stereo, fmt="pcm24")
        stimuli.append({
            "id": r.spec.id,
            "label": r.spec.label,
            "spec": r.spec.to_dict(),
            "mono_file": mono_name,
            "stereo_file": stereo_name,
            "duration": r.mono.n_samples / r.mono.sample_rate,
            "l_p_a_eq": round(lp_eq_a(r.mono), 4),
        })
        _say(out / mono_name)
        _say(out / stereo_name)
    doc = {
        "schema_version": mf.SCHEMA_VERSION,
        "kind": "synthesis",
        "seed": args.seed,
        "sample_rate": float(args.sample_rate),
        "target_dba": args.target_dba,
        "pa_per_full_scale": PA_PER_FULL_SCALE,
        "trajectory": _trajectory_dict(traj),
        "stimuli": stimuli,
    }
    _write_json(out / SYNTH_MANIFEST, doc)
    _say(out / SYNTH_MANIFEST)
    return 0


def _load_synthesis(audio_dir: Path, manifest_path: str | None) -> dict:
    path = Path(manifest_path) if manifest_path else audio_dir / SYNTH_MANIFEST
    if not path.exists():
        raise SignalError(f"synthesis manifest not found: {path}")
    with open(path) as fh:
        return json.load(fh)


def cmd_metrics(args) -> int:
    audio_dir = Path(args.audio)
    doc = _load_synthesis(audio_dir, args.manifest)
    out = _out_dir(args)

    def one(entry: dict) -> MetricSet:
        wav = audio_dir / entry["mono_file"]
        if not wav.exists():
            raise SignalError(f"missing audio file {wav}")
        sig = read_wav(wav, doc["pa_per_full_scale"])
        if sig.sample_rate != doc["sample_rate"]:
            raise SignalError(
                f"{wav}: sample rate {sig.sample_rate} does not match "
                f"manifest rate {doc['sample_rate']}")
        return pipeline.metric_battery(sig, entry["id"])

    workers = args.workers or min(4, os.cpu_count() or 1)
    if workers <= 1:
        table = [one(e) for e in doc["stimuli"]]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            table = list(pool.map(one, doc["stimuli"]))
    path = out / f"metrics.{args.format}"
    _dump_metrics(path, table, args.format)
    _say(path)
    return 0


def _dump_metrics(path: Path, table: list[MetricSet], fmt: str) -> None:
    if fmt == "json":
        _write_json(path, [m.to_dict() for m in table])
    else:
        rows = [[m.stimulus_id] + [repr(m.value(c)) for c in METRIC_COLUMNS]
                for m in table]
        _write_csv(path, ["stimulus_id"] + METRIC_COLUMNS, rows)


def load_metrics(path: str | Path) -> list[MetricSet]:
    """Read a metrics table written by ``metrics`` (CSV or JSON)."""
    path = Path(path)
    if path.suffix == ".json":
        with open(path) as fh:
            rows = json.load(fh)
    else:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        try:
            out.append(MetricSet(stimulus_id=int(row["stimulus_id"]),
                                 **{c: float(row[c]) for c in METRIC_COLUMNS}))
        except (KeyError, TypeError, ValueError) as err:
            raise RatingsError(f"{path}: malformed metrics row {row!r} ({err})")
    return out


def _parse_exclude(text: str | None) -> frozenset[int]:
    if text is None:
        return DEFAULT_EXCLUDE
    if not text.strip():
        return frozenset()
    try:
        return frozenset(int(p) for p in text.split(","))
    except ValueError:
        raise RatingsError(f"--exclude expects comma-separated integers, got {text!r}")


def cmd_analyze(args) -> int:
    metrics = load_metrics(args.metrics)
    records = load_ratings(args.ratings)
    known = {m.stimulus_id for m in metrics}
    rated = {r.stimulus_id for r in records}
    if not rated <= known:
        raise RatingsError(
            f"ratings reference stimuli without metrics: {sorted(rated - known)}")
    out = _out_dir(args)
    exclude = _parse_exclude(args.exclude)
    means = mean_ratings(records)

    table = correlation_table(metrics, means, exclude=exclude)
    if args.format == "json":
        _write_json(out / "correlation.json",
                    [{"metric": c.metric, "rho": c.rho, "p_value": c.p_value,
                      "n": c.n, "significant": c.significant} for c in table])
        _say(out / "correlation.json")
    else:
        _write_csv(out / "correlation.csv",
                   ["metric", "rho", "p_value", "n", "significant"],
                   [[c.metric, repr(c.rho), repr(c.p_value), c.n,
                     str(c.significant).lower()] for c in table])
        _say(out / "correlation.csv")

    box_docs = []
    values_by_stimulus: dict[int, list[float]] = {}
    for sid in sorted(rated):
        values = [float(r.annoyance) for r in records if r.stimulus_id == sid]
        values_by_stimulus[sid] = values
        b = describe(records, sid)
        box_docs.append({"stimulus_id": sid, "n": len(values), "mean": b.mean,
                         "std": float(np.std(values)), "median": b.median,
                         "q25": b.q25, "q75": b.q75,
                         "whisker_low": b.whisker_low, "whisker_high": b.whisker_high,
                         "outliers": list(b.outliers)})
    header = ["stimulus_id", "n", "mean", "std", "median", "q25", "q75",
              "whisker_low", "whisker_high", "outliers"]
    if args.format == "json":
        _write_json(out / "box_stats.json", box_docs)
        _say(out / "box_stats.json")
    else:
        rows = [[d[h] if h in ("stimulus_id", "n")
                 else ";".join(repr(o) for o in d[h]) if h == "outliers"
                 else repr(d[h]) for h in header] for d in box_docs]
        _write_csv(out / "box_stats.csv", header, rows)
        _say(out / "box_stats.csv")

    ids = sorted((known & rated) - exclude)
    by_id = {m.stimulus_id: m for m in metrics}
    pa = np.array([by_id[i].PA for i in ids])
    y = np.array([means[i] for i in ids])
    std = np.array([float(np.std(values_by_stimulus[i])) for i in ids])
    slope, intercept, residuals = linear_fit(pa, y)
    _write_json(out / "fit.json", {
        "metric": "PA",
        "stimulus_ids": ids,
        "slope": slope,
        "intercept": intercept,
        "residual_sum": float(np.sum(residuals)),
        "rms_error": float(np.sqrt(np.mean(residuals**2))),
    })
    _say(out / "fit.json")
    _write_csv(out / "scatter.csv", ["stimulus_id", "PA", "mean", "std"],
               [[i, repr(float(by_id[i].PA)), repr(means[i]), repr(float(s))]
                for i, s in zip(ids, std)])
    _say(out / "scatter.csv")

    plots.rating_boxplot(values_by_stimulus, out / "fig_boxplot.png")
    _say(out / "fig_boxplot.png")
    plots.scatter_fit(pa, y, std, slope, intercept, out / "fig_scatter.png",
                      xlabel="psychoacoustic annoyance (PA)", point_labels=ids)
    _say(out / "fig_scatter.png")
    return 0


def cmd_spectrogram(args) -> int:
    sig = read_wav(args.audio)
    spec = spectrogram(sig, n_fft=args.n_fft, overlap=args.overlap)
    out = _out_dir(args)
    stem = Path(args.audio).stem
    header = ["freq_hz"] + [repr(float(t)) for t in spec.times]
    rows = [[repr(float(f))] + [repr(float(v)) for v in spec.levels_db[i]]
            for i, f in enumerate(spec.freqs)]
    _write_csv(out / f"{stem}_spectrogram.csv", header, rows)
    _say(out / f"{stem}_spectrogram.csv")
    plots.spectrogram_image(spec, out / f"{stem}_spectrogram.png", f_max=args.f_max)
    _say(out / f"{stem}_spectrogram.png")
    return 0


def cmd_session(args) -> int:
    audio_dir = Path(args.audio)
    doc = _load_synthesis(audio_dir, args.manifest)
    out = _out_dir(args)
    (out / "audio").mkdir(exist_ok=True)
    durations, files, labels = {}, {}, {}
    for entry in doc["stimuli"]:
        src = audio_dir / entry["stereo_file"]
        if not src.exists():
            raise SignalError(f"missing audio file {src}")
        dest = out / "audio" / entry["stereo_file"]
        _atomic_write(dest, src.read_bytes())
        sid = entry["id"]
        durations[sid] = entry["duration"]
        files[sid] = f"audio/{entry['stereo_file']}"
        labels[sid] = entry["label"]

    traj = SimpleNamespace(**doc["trajectory"])
    session = mf.build_manifest(args.session_id, doc["sample_rate"],
                                doc["pa_per_full_scale"], traj, args.seed,
                                durations, files, labels)
    _write_json(out / "manifest.json", session)
    _say(out / "manifest.json")
    return 0


# ------------------------------------------------------------------- arg parsing

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evsound",
        description="Synthesize warning-sound pass-by stimuli, measure them, "
                    "and analyze listening-test ratings.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render the stimulus catalogue to WAV files")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--seed", type=int, default=0, help="noise-bed seed")
    p.add_argument("--sample-rate", type=float, default=DEFAULT_SAMPLE_RATE)
    p.add_argument("--target-dba", type=float, default=pipeline.DEFAULT_TARGET_DBA)
    p.add_argument("--spec-file", help="JSON list of stimulus specs (default: built-in catalogue)")
    p.add_argument("--diesel-file", help="WAV recording for the engine stimulus")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("metrics", help="compute the metric battery for synthesized audio")
    p.add_argument("--audio", required=True, help="directory written by synth")
    p.add_argument("--manifest", help="synthesis manifest path (default <audio>/synthesis.json)")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("analyze", help="correlate metrics with listener ratings")
    p.add_argument("--metrics", required=True, help="metrics.csv or metrics.json")
    p.add_argument("--ratings", required=True, help="ratings CSV or session-result JSON")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--exclude", help="comma-separated stimulus ids to drop (default 14,15)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("spectrogram", help="spectrogram CSV and image for one WAV")
    p.add_argument("audio", help="WAV file")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--n-fft", type=int, default=4096)
    p.add_argument("--overlap", type=float, default=0.75)
    p.add_argument("--f-max", type=float, default=5000.0, help="image frequency limit")
    p.set_defaults(fn=cmd_spectrogram)

    p = sub.add_parser("session", help="package a runner bundle from synthesized audio")
    p.add_argument("--audio", required=True, help="directory written by synth")
    p.add_argument("--manifest", help="synthesis manifest path (default <audio>/synthesis.json)")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--seed", type=int, default=0, help="trial-order seed")
    p.add_argument("--session-id", default="session-0")
    p.set_defaults(fn=cmd_session)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SignalError, RatingsError, OSError) as err:
        json.dump({"error": type(err).__name__, "message": str(err)},
                  sys.stderr, indent=None)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
