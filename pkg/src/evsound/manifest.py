"""Session bundle manifest and result documents.

A session bundle is a directory of stereo WAV files plus one JSON manifest
describing the trial order, playback calibration, trajectory, and the
verbatim on-screen texts.  The experiment runner consumes the manifest,
plays the trials in the order given, and exports a result document; both
document shapes are validated here against versioned JSON schemas.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .signal import SignalError

SCHEMA_VERSION = 1

INSTRUCTION_TEXT = ("Start by HOLDING the trigger button. Release the trigger "
                    "button when it becomes unsafe to cross; press it again "
                    "when safe to cross")

QUESTIONS = [
    {
        "key": "noticeability",
        "text": "The vehicle sound was easy to notice "
                "(0 = not easy to notice, 10 = easy to notice)",
        "min": 0,
        "max": 10,
    },
    {
        "key": "informativeness",
        "text": "The sound gave me enough information to realise that a "
                "vehicle was approaching (0 = not enough information, "
                "10 = enough information)",
        "min": 0,
        "max": 10,
    },
    {
        "key": "annoyance",
        "text": "The vehicle sound was annoying "
                "(0 = not annoying, 10 = extremely annoying)",
        "min": 0,
        "max": 10,
    },
]

TRAINING_STIMULUS_ID = 3

_TRIAL_SCHEMA = {
    "type": "object",
    "required": ["stimulus_id", "audio_file", "duration", "training"],
    "properties": {
        "stimulus_id": {"type": "integer", "minimum": 1, "maximum": 15},
        "audio_file": {"type": "string"},
        "duration": {"type": "number", "exclusiveMinimum": 0},
        "training": {"type": "boolean"},
        "label": {"type": "string"},
    },
}

MANIFEST_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "session_id", "sample_rate",
                 "pa_per_full_scale", "trajectory", "seed",
                 "instruction_text", "questions", "trials"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "session_id": {"type": "string", "minLength": 1},
        "sample_rate": {"type": "number", "exclusiveMinimum": 0},
        "pa_per_full_scale": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer"},
        "trajectory": {
            "type": "object",
            "required": ["x_start", "x_end", "y", "speed", "sound_speed"],
            "properties": {k: {"type": "number"} for k in
                           ("x_start", "x_end", "y", "speed", "sound_speed")},
        },
        "instruction_text": {"type": "string"},
        "questions": {
            "type": "array",
            "minItems": 3,
            "maxItems": 3,
            "items": {
                "type": "object",
                "required": ["key", "text", "min", "max"],
                "properties": {
                    "key": {"enum": ["noticeability", "informativeness", "annoyance"]},
                    "text": {"type": "string", "minLength": 1},
                    "min": {"type": "integer"},
                    "max": {"type": "integer"},
                },
            },
        },
        "trials": {"type": "array", "minItems": 16, "maxItems": 16,
                   "items": _TRIAL_SCHEMA},
    },
}

_EVENT_SCHEMA = {
    "type": "object",
    "required": ["event", "time"],
    "properties": {
        "event": {"enum": ["press", "release"]},
        "time": {"type": "number", "minimum": 0},
    },
}

RESULT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "session_id", "participant_id", "trials"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "session_id": {"type": "string"},
        "participant_id": {"type": "string", "minLength": 1},
        "demographics": {"type": "object"},
        "trials": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["stimulus_id", "training", "responses"],
                "properties": {
                    "stimulus_id": {"type": "integer", "minimum": 1, "maximum": 15},
                    "training": {"type": "boolean"},
                    "responses": {
                        "type": "object",
                        "required": ["noticeability", "informativeness", "annoyance"],
                        "properties": {k: {"type": "integer", "minimum": 0, "maximum": 10}
                                       for k in ("noticeability", "informativeness", "annoyance")},
                    },
                    "keypress_timeline": {"type": "array", "items": _EVENT_SCHEMA},
                },
            },
        },
    },
}


class ManifestError(SignalError):
    """Raised when a manifest or result document fails validation."""


def _validate(doc: dict, schema: dict, what: str) -> None:
    import jsonschema

    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as err:
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ManifestError(f"invalid {what} at {path}: {err.message}") from None


def validate_manifest(doc: dict) -> None:
    _validate(doc, MANIFEST_SCHEMA, "session manifest")
    experimental = [t for t in doc["trials"] if not t["training"]]
    training = [t for t in doc["trials"] if t["training"]]
    if len(training) != 1:
        raise ManifestError(f"expected exactly 1 training trial, got {len(training)}")
    ids = sorted(t["stimulus_id"] for t in experimental)
    if ids != list(range(1, 16)):
        raise ManifestError("experimental trials must be a permutation of stimulus ids 1..15")
    if doc["trials"][0] is not training[0]:
        raise ManifestError("the training trial must come first")


def validate_session_result(doc: dict) -> None:
    _validate(doc, RESULT_SCHEMA, "session result")


def trial_order(seed: int) -> list[int]:
    """Deterministic pseudorandom permutation of stimulus ids 1..15."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return [int(i) for i in rng.permutation(np.arange(1, 16))]


def build_manifest(session_id: str, sample_rate: float, pa_per_full_scale: float,
                   trajectory, seed: int, durations: dict[int, float],
                   audio_files: dict[int, str], labels: dict[int, str] | None = None,
                   ) -> dict:
    """Assemble and validate a session manifest.

    ``durations`` and ``audio_files`` map stimulus id to trial duration and
    WAV file name; the training trial reuses one experimental stimulus and
    is flagged, so the runner can exclude it from analysis.
    """
    labels = labels or {}

    def trial(sid: int, training: bool) -> dict:
        t = {"stimulus_id": sid,
             "audio_file": audio_files[sid],
             "duration": float(durations[sid]),
             "training": training}
        if sid in labels:
            t["label"] = labels[sid]
        return t

    doc = {
        "schema_version": SCHEMA_VERSION,
        "session_id": session_id,
        "sample_rate": float(sample_rate),
        "pa_per_full_scale": float(pa_per_full_scale),
        "seed": int(seed),
        "trajectory": {
            "x_start": trajectory.x_start,
            "x_end": trajectory.x_end,
            "y": trajectory.y,
            "speed": trajectory.speed,
            "sound_speed": trajectory.sound_speed,
        },
        "instruction_text": INSTRUCTION_TEXT,
        "questions": QUESTIONS,
        "trials": [trial(TRAINING_STIMULUS_ID, True)]
                  + [trial(sid, False) for sid in trial_order(seed)],
    }
    validate_manifest(doc)
    return doc


def load_manifest(path: str | Path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    validate_manifest(doc)
    return doc
