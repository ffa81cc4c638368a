// Session state machine, deliberately free of DOM and audio APIs so it can
// run under a test harness with scripted clocks and events.  The page layer
// owns playback and forwards the audio element's clock; the engine owns
// ordering, the press/release log, slider state, and the exported document.

import {
  KeyEvent,
  ManifestTrial,
  RatingKey,
  RATING_KEYS,
  SessionManifest,
  SessionResult,
  TrialResult,
} from "./types.js";

export type Phase = "instructions" | "playing" | "rating" | "done";

interface RatingState {
  value: number;
  touched: boolean;
}

export class SessionError extends Error {}

export class SessionEngine {
  readonly manifest: SessionManifest;
  readonly participantId: string;
  demographics: Record<string, string> = {};

  private phase: Phase = "instructions";
  private trialIndex = -1;
  private timeline: KeyEvent[] = [];
  private pressed = false;
  private ratings = new Map<RatingKey, RatingState>();
  private finished: TrialResult[] = [];

  constructor(manifest: SessionManifest, participantId: string) {
    if (!participantId) throw new SessionError("participant id must not be empty");
    this.manifest = manifest;
    this.participantId = participantId;
  }

  get state(): Phase {
    return this.phase;
  }

  get currentTrial(): ManifestTrial | null {
    if (this.trialIndex < 0 || this.trialIndex >= this.manifest.trials.length) return null;
    return this.manifest.trials[this.trialIndex];
  }

  get trialNumber(): number {
    return this.trialIndex + 1;
  }

  get completedTrials(): number {
    return this.finished.length;
  }

  /** Leave the instruction screen and arm the first (training) trial. */
  beginSession(): void {
    this.expect("instructions", "beginSession");
    this.advance();
  }

  /** Playback of the current trial started (or restarted after a load error). */
  startPlayback(): void {
    this.expect("playing", "startPlayback");
    this.timeline = [];
    this.pressed = false;
  }

  press(audioTime: number): void {
    if (this.phase !== "playing" || this.pressed) return; // ignore key autorepeat
    this.pressed = true;
    this.log("press", audioTime);
  }

  release(audioTime: number): void {
    if (this.phase !== "playing" || !this.pressed) return;
    this.pressed = false;
    this.log("release", audioTime);
  }

  /** Playback finished; move to the rating screen with unset sliders. */
  endPlayback(): void {
    this.expect("playing", "endPlayback");
    this.phase = "rating";
    this.ratings.clear();
  }

  /** Slider interaction: values clamp to the question's integer range. */
  setRating(key: RatingKey, value: number): void {
    this.expect("rating", "setRating");
    const clamped = Math.min(10, Math.max(0, Math.round(value)));
    this.ratings.set(key, { value: clamped, touched: true });
  }

  getRating(key: RatingKey): number | null {
    const r = this.ratings.get(key);
    return r && r.touched ? r.value : null;
  }

  /** All three sliders must have been touched before the answers count. */
  canSubmit(): boolean {
    return this.phase === "rating" && RATING_KEYS.every((k) => this.ratings.get(k)?.touched);
  }

  submitRatings(): void {
    this.expect("rating", "submitRatings");
    if (!this.canSubmit()) {
      throw new SessionError("all three sliders must be set before submitting");
    }
    const trial = this.currentTrial as ManifestTrial;
    const responses = {} as Record<RatingKey, number>;
    for (const key of RATING_KEYS) responses[key] = (this.ratings.get(key) as RatingState).value;
    this.finished.push({
      stimulus_id: trial.stimulus_id,
      training: trial.training,
      responses,
      keypress_timeline: this.timeline,
    });
    this.advance();
  }

  /**
   * Result document in the analysis package's ingestion format.  Before the
   * last trial is submitted the export is flagged partial, so an aborted
   * session is still recoverable but cannot masquerade as a complete one.
   */
  exportResult(): SessionResult {
    const result: SessionResult = {
      schema_version: this.manifest.schema_version,
      session_id: this.manifest.session_id,
      participant_id: this.participantId,
      demographics: this.demographics,
      trials: this.finished.slice(),
    };
    if (this.phase !== "done") result.partial = true;
    return result;
  }

  private advance(): void {
    this.trialIndex += 1;
    this.timeline = [];
    this.pressed = false;
    if (this.trialIndex >= this.manifest.trials.length) {
      this.phase = "done";
    } else {
      this.phase = "playing";
    }
  }

  private log(event: "press" | "release", audioTime: number): void {
    const duration = (this.currentTrial as ManifestTrial).duration;
    const time = Math.min(duration, Math.max(0, audioTime));
    this.timeline.push({ event, time });
  }

  private expect(phase: Phase, what: string): void {
    if (this.phase !== phase) {
      throw new SessionError(`${what} is only valid in the ${phase} phase (now: ${this.phase})`);
    }
  }
}
