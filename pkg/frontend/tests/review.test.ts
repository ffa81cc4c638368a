import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { SessionEngine } from "../src/engine.js";
import { formatReport, reviewSession } from "../src/review.js";
import { RATING_KEYS, SessionManifest, SessionResult } from "../src/types.js";
import { validateManifest } from "../src/validate.js";

function loadManifest(): SessionManifest {
  const url = new URL("../fixtures/sample-manifest.json", import.meta.url);
  return validateManifest(JSON.parse(readFileSync(url, "utf-8")));
}

function loadSampleResult(): SessionResult {
  const url = new URL("../fixtures/sample-session-result.json", import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8"));
}

/** Complete session where every trial gets one hold from 2 s to 6.5 s. */
function runSession(manifest: SessionManifest): SessionResult {
  const engine = new SessionEngine(manifest, "P42");
  engine.beginSession();
  while (engine.state === "playing") {
    engine.startPlayback();
    engine.press(2.0);
    engine.release(6.5);
    engine.endPlayback();
    for (const key of RATING_KEYS) engine.setRating(key, 4);
    engine.submitRatings();
  }
  return engine.exportResult();
}

describe("reviewSession", () => {
  it("summarises a clean session with one row per trial and no problems", () => {
    const manifest = loadManifest();
    const report = reviewSession(manifest, runSession(manifest));
    expect(report.complete).toBe(true);
    expect(report.problems).toEqual([]);
    expect(report.trials).toHaveLength(manifest.trials.length);
    expect(report.trials.map((t) => t.stimulus_id)).toEqual(
      manifest.trials.map((t) => t.stimulus_id),
    );
  });

  it("reports held durations from the press/release pairs", () => {
    const manifest = loadManifest();
    const report = reviewSession(manifest, runSession(manifest));
    for (const trial of report.trials) {
      expect(trial.presses).toBe(1);
      expect(trial.noticed_seconds).toBeCloseTo(4.5, 1);
    }
  });

  it("counts an unreleased final hold up to the end of playback", () => {
    const manifest = loadManifest();
    const result = runSession(manifest);
    const duration = manifest.trials[0].duration;
    result.trials[0].keypress_timeline = [{ event: "press", time: duration - 2.0 }];
    const report = reviewSession(manifest, result);
    expect(report.trials[0].noticed_seconds).toBeCloseTo(2.0, 1);
    expect(report.trials[0].presses).toBe(1);
  });

  it("accepts the bundled sample result against the bundled manifest", () => {
    const report = reviewSession(loadManifest(), loadSampleResult());
    expect(report.complete).toBe(true);
    expect(report.problems).toEqual([]);
    const silent = report.trials.find((t) => t.stimulus_id === 15);
    expect(silent?.noticed_seconds).toBe(0);
    expect(silent?.presses).toBe(0);
  });

  it("flags a hand-edited rating outside the scale", () => {
    const manifest = loadManifest();
    const result = runSession(manifest);
    result.trials[4].responses.annoyance = 12;
    const report = reviewSession(manifest, result);
    expect(report.problems.some((p) => p.includes("annoyance rating 12"))).toBe(true);
    expect(formatReport(report)).toContain("PROBLEMS:");
  });

  it("flags trials that do not match the scheduled order", () => {
    const manifest = loadManifest();
    const result = runSession(manifest);
    const tmp = result.trials[2].stimulus_id;
    result.trials[2].stimulus_id = result.trials[3].stimulus_id;
    result.trials[3].stimulus_id = tmp;
    const report = reviewSession(manifest, result);
    expect(report.problems.filter((p) => p.includes("manifest schedules"))).toHaveLength(2);
  });

  it("flags a mangled timeline", () => {
    const manifest = loadManifest();
    const result = runSession(manifest);
    result.trials[1].keypress_timeline = [
      { event: "release", time: 1.0 },
      { event: "release", time: 0.5 },
    ];
    const report = reviewSession(manifest, result);
    expect(report.problems.some((p) => p.includes("should be a press"))).toBe(true);
    expect(report.problems.some((p) => p.includes("backwards"))).toBe(true);
  });

  it("marks a truncated result that does not admit being partial", () => {
    const manifest = loadManifest();
    const result = runSession(manifest);
    result.trials = result.trials.slice(0, 5);
    const report = reviewSession(manifest, result);
    expect(report.complete).toBe(false);
    expect(report.problems.some((p) => p.includes("manifest schedules 16"))).toBe(true);
  });

  it("labels partial sessions in the formatted report", () => {
    const manifest = loadManifest();
    const engine = new SessionEngine(manifest, "P42");
    engine.beginSession();
    engine.startPlayback();
    engine.endPlayback();
    for (const key of RATING_KEYS) engine.setRating(key, 4);
    engine.submitRatings();
    const report = reviewSession(manifest, engine.exportResult());
    expect(report.complete).toBe(false);
    expect(formatReport(report)).toContain("(PARTIAL)");
  });

  it("flags a session id that does not belong to the manifest", () => {
    const manifest = loadManifest();
    const result = runSession(manifest);
    result.session_id = "someone-elses-session";
    const report = reviewSession(manifest, result);
    expect(report.problems.some((p) => p.includes("does not match manifest"))).toBe(true);
  });
});
