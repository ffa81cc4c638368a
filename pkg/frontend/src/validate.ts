// Defensive checks on documents crossing the package boundary.  The Python
// side owns the authoritative JSON schemas; the runner re-checks the parts it
// relies on so a bad bundle fails at load time with a readable message
// instead of mid-session.

import { RATING_KEYS, SessionManifest, SessionResult } from "./types.js";

export class ValidationError extends Error {}

function fail(where: string, message: string): never {
  throw new ValidationError(`${where}: ${message}`);
}

function isInt(v: unknown): v is number {
  return typeof v === "number" && Number.isInteger(v);
}

export function validateManifest(doc: unknown): SessionManifest {
  if (typeof doc !== "object" || doc === null) fail("manifest", "not an object");
  const m = doc as Record<string, unknown>;
  if (m.schema_version !== 1) fail("manifest", `unsupported schema_version ${m.schema_version}`);
  if (typeof m.session_id !== "string" || !m.session_id) fail("manifest", "missing session_id");
  if (typeof m.instruction_text !== "string" || !m.instruction_text) {
    fail("manifest", "missing instruction_text");
  }
  if (!Array.isArray(m.questions) || m.questions.length !== 3) {
    fail("manifest", "expected exactly 3 questions");
  }
  const keys = m.questions.map((q) => (q as Record<string, unknown>).key);
  for (const key of RATING_KEYS) {
    if (!keys.includes(key)) fail("manifest", `missing question for ${key}`);
  }
  if (!Array.isArray(m.trials) || m.trials.length === 0) fail("manifest", "no trials");
  m.trials.forEach((t, i) => {
    const trial = t as Record<string, unknown>;
    if (!isInt(trial.stimulus_id) || trial.stimulus_id < 1 || trial.stimulus_id > 15) {
      fail(`manifest trial ${i}`, `bad stimulus_id ${trial.stimulus_id}`);
    }
    if (typeof trial.audio_file !== "string" || !trial.audio_file) {
      fail(`manifest trial ${i}`, "missing audio_file");
    }
    if (typeof trial.duration !== "number" || trial.duration <= 0) {
      fail(`manifest trial ${i}`, "bad duration");
    }
    if (typeof trial.training !== "boolean") fail(`manifest trial ${i}`, "missing training flag");
  });
  const training = (m.trials as Record<string, unknown>[]).filter((t) => t.training);
  if (training.length !== 1 || !(m.trials as Record<string, unknown>[])[0].training) {
    fail("manifest", "expected exactly one training trial, first in the list");
  }
  return doc as SessionManifest;
}

export function validateResult(doc: unknown): SessionResult {
  if (typeof doc !== "object" || doc === null) fail("result", "not an object");
  const r = doc as Record<string, unknown>;
  if (r.schema_version !== 1) fail("result", `unsupported schema_version ${r.schema_version}`);
  if (typeof r.participant_id !== "string" || !r.participant_id) {
    fail("result", "missing participant_id");
  }
  if (!Array.isArray(r.trials) || r.trials.length === 0) fail("result", "no trials");
  r.trials.forEach((t, i) => {
    const trial = t as Record<string, unknown>;
    if (!isInt(trial.stimulus_id)) fail(`result trial ${i}`, "bad stimulus_id");
    const responses = trial.responses as Record<string, unknown> | undefined;
    if (!responses) fail(`result trial ${i}`, "missing responses");
    for (const key of RATING_KEYS) {
      const v = responses[key];
      if (!isInt(v) || v < 0 || v > 10) {
        fail(`result trial ${i}`, `${key} must be an integer in 0..10, got ${v}`);
      }
    }
    const timeline = (trial.keypress_timeline ?? []) as Record<string, unknown>[];
    let prev = 0; // audio-clock times are never negative
    timeline.forEach((ev, j) => {
      const want = j % 2 === 0 ? "press" : "release";
      if (ev.event !== want) {
        fail(`result trial ${i}`, `timeline entry ${j} should be a ${want}, got ${ev.event}`);
      }
      if (typeof ev.time !== "number" || ev.time < prev) {
        fail(`result trial ${i}`, `timeline entry ${j} times must be non-negative and non-decreasing`);
      }
      prev = ev.time;
    });
  });
  return doc as SessionResult;
}
