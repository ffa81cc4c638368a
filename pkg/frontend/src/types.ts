// Document shapes shared with the synthesis/analysis toolchain.  The JSON
// schemas are owned by the Python package; these mirror them for the runner.

export interface TrajectoryInfo {
  x_start: number;
  x_end: number;
  y: number;
  speed: number;
  sound_speed: number;
}

export interface Question {
  key: RatingKey;
  text: string;
  min: number;
  max: number;
}

export interface ManifestTrial {
  stimulus_id: number;
  audio_file: string;
  duration: number;
  training: boolean;
  label?: string;
}

export interface SessionManifest {
  schema_version: number;
  session_id: string;
  sample_rate: number;
  pa_per_full_scale: number;
  seed: number;
  trajectory: TrajectoryInfo;
  instruction_text: string;
  questions: Question[];
  trials: ManifestTrial[];
}

export type RatingKey = "noticeability" | "informativeness" | "annoyance";

export const RATING_KEYS: RatingKey[] = ["noticeability", "informativeness", "annoyance"];

export interface KeyEvent {
  event: "press" | "release";
  time: number; // seconds on the trial's audio clock
}

export interface TrialResult {
  stimulus_id: number;
  training: boolean;
  responses: Record<RatingKey, number>;
  keypress_timeline: KeyEvent[];
}

export interface SessionResult {
  schema_version: number;
  session_id: string;
  participant_id: string;
  demographics?: Record<string, string>;
  trials: TrialResult[];
  partial?: boolean;
}
