// Post-session review: pair a result document with its manifest and produce
// a human-checkable summary table, flagging anything a hand-edited file
// could have broken (ratings out of range, mangled timelines, reordered
// trials).  Used by the operator page before a result is archived.

import { RATING_KEYS, SessionManifest, SessionResult, KeyEvent } from "./types.js";

export interface TrialSummary {
  index: number;
  stimulus_id: number;
  training: boolean;
  responses: Record<string, number>;
  /** Seconds the response key was held, summed over presses. */
  noticed_seconds: number;
  presses: number;
  problems: string[];
}

export interface ReviewReport {
  session_id: string;
  participant_id: string;
  complete: boolean;
  trials: TrialSummary[];
  problems: string[];
}

function heldSeconds(timeline: KeyEvent[], duration: number): number {
  let total = 0;
  for (let i = 0; i + 1 < timeline.length; i += 2) {
    total += timeline[i + 1].time - timeline[i].time;
  }
  // An unreleased final press counts until the end of playback.
  if (timeline.length % 2 === 1) {
    total += duration - timeline[timeline.length - 1].time;
  }
  return total;
}

function timelineProblems(timeline: KeyEvent[]): string[] {
  const problems: string[] = [];
  let last = -Infinity;
  timeline.forEach((ev, i) => {
    const want = i % 2 === 0 ? "press" : "release";
    if (ev.event !== want) problems.push(`timeline event ${i} should be a ${want}`);
    if (ev.time < last) problems.push(`timeline event ${i} goes backwards in time`);
    last = ev.time;
  });
  return problems;
}

export function reviewSession(manifest: SessionManifest, result: SessionResult): ReviewReport {
  const problems: string[] = [];
  if (result.session_id !== manifest.session_id) {
    problems.push(`session id ${result.session_id} does not match manifest ${manifest.session_id}`);
  }
  const complete = !result.partial && result.trials.length === manifest.trials.length;
  if (!complete && !result.partial) {
    problems.push(
      `result has ${result.trials.length} trials but the manifest schedules ${manifest.trials.length}`,
    );
  }

  const trials: TrialSummary[] = result.trials.map((trial, i) => {
    const trialProblems: string[] = [];
    const scheduled = manifest.trials[i];
    if (!scheduled) {
      trialProblems.push("not scheduled in the manifest");
    } else if (scheduled.stimulus_id !== trial.stimulus_id) {
      trialProblems.push(
        `played stimulus ${trial.stimulus_id} but the manifest schedules ${scheduled.stimulus_id}`,
      );
    }
    for (const key of RATING_KEYS) {
      const v = trial.responses[key];
      if (!Number.isInteger(v) || v < 0 || v > 10) {
        trialProblems.push(`${key} rating ${v} is outside 0..10`);
      }
    }
    trialProblems.push(...timelineProblems(trial.keypress_timeline));
    const duration = scheduled ? scheduled.duration : 0;
    return {
      index: i,
      stimulus_id: trial.stimulus_id,
      training: trial.training,
      responses: { ...trial.responses },
      noticed_seconds: heldSeconds(trial.keypress_timeline, duration),
      presses: Math.ceil(trial.keypress_timeline.length / 2),
      problems: trialProblems,
    };
  });

  for (const t of trials) problems.push(...t.problems.map((p) => `trial ${t.index + 1}: ${p}`));
  return {
    session_id: result.session_id,
    participant_id: result.participant_id,
    complete,
    trials,
    problems,
  };
}

/** Plain-text table for the operator console. */
export function formatReport(report: ReviewReport): string {
  const lines = [
    `session ${report.session_id} — participant ${report.participant_id}` +
      (report.complete ? "" : " (PARTIAL)"),
  ];
  for (const t of report.trials) {
    const tag = t.training ? "train" : `t${String(t.index).padStart(2, "0")}`;
    const r = RATING_KEYS.map((k) => `${k[0]}=${t.responses[k]}`).join(" ");
    lines.push(
      `${tag}  stim ${String(t.stimulus_id).padStart(2, "0")}  ${r}  ` +
        `noticed ${t.noticed_seconds.toFixed(2)}s over ${t.presses} press(es)`,
    );
  }
  if (report.problems.length) {
    lines.push("PROBLEMS:");
    for (const p of report.problems) lines.push(`  - ${p}`);
  }
  return lines.join("\n");
}
