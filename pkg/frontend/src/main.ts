// Browser entry point: thin DOM/audio layer over the SessionEngine.  All
// behaviour that matters for the exported document lives in engine.ts and is
// covered by tests; this file only moves events between the page and the
// engine.

import { SessionEngine } from "./engine.js";
import { RATING_KEYS, RatingKey, SessionManifest } from "./types.js";
import { validateManifest, validateResult } from "./validate.js";

const RESPONSE_KEY = " "; // space bar, held while a vehicle is audible

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id} in index.html`);
  return el as T;
}

function show(id: string): void {
  for (const screen of document.querySelectorAll<HTMLElement>(".screen")) {
    screen.hidden = screen.id !== id;
  }
}

async function loadManifest(): Promise<SessionManifest> {
  const url = new URLSearchParams(location.search).get("manifest") ?? "session-manifest.json";
  const resp = await fetch(url);
  if (!resp.ok) throw new Error(`cannot fetch ${url}: HTTP ${resp.status}`);
  const manifest = validateManifest(await resp.json());
  return manifest;
}

function downloadResult(engine: SessionEngine): void {
  const result = engine.exportResult();
  validateResult(result); // refuse to hand the operator a malformed file
  const blob = new Blob([JSON.stringify(result, null, 2)], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `${result.session_id}_${result.participant_id}.json`;
  a.click();
  URL.revokeObjectURL(a.href);
}

async function run(): Promise<void> {
  const manifest = await loadManifest();
  const audio = byId<HTMLAudioElement>("player");
  const status = byId<HTMLElement>("status");
  const sliders = new Map<RatingKey, HTMLInputElement>();

  byId<HTMLElement>("instructions").textContent = manifest.instruction_text;

  const ratingForm = byId<HTMLElement>("sliders");
  for (const q of manifest.questions) {
    const label = document.createElement("label");
    label.textContent = q.text;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(q.min);
    input.max = String(q.max);
    input.step = "1";
    input.value = String(Math.round((q.min + q.max) / 2));
    label.appendChild(input);
    ratingForm.appendChild(label);
    sliders.set(q.key, input);
  }

  const participant = prompt("Participant code:", "") ?? "";
  const engine = new SessionEngine(manifest, participant || "anonymous");

  const playTrial = () => {
    const trial = engine.currentTrial;
    if (!trial) return;
    show("screen-playing");
    status.textContent = trial.training
      ? "Training trial — hold SPACE while you hear the vehicle."
      : `Trial ${engine.trialNumber} of ${manifest.trials.length}`;
    audio.src = trial.audio_file;
    engine.startPlayback();
    void audio.play().catch((err: unknown) => {
      status.textContent = `Playback failed (${String(err)}); press R to retry.`;
    });
  };

  const showRating = () => {
    show("screen-rating");
    for (const [key, input] of sliders) {
      input.value = String(Math.round((Number(input.min) + Number(input.max)) / 2));
      input.dataset.touched = "";
      input.oninput = () => {
        engine.setRating(key, Number(input.value));
        input.dataset.touched = "1";
        submit.disabled = !engine.canSubmit();
      };
    }
    submit.disabled = true;
  };

  const submit = byId<HTMLButtonElement>("submit");
  submit.addEventListener("click", () => {
    engine.submitRatings();
    if (engine.state === "done") {
      show("screen-done");
      downloadResult(engine);
    } else {
      playTrial();
    }
  });

  audio.addEventListener("ended", () => {
    engine.release(audio.duration); // close an unreleased hold at the end
    engine.endPlayback();
    showRating();
  });

  document.addEventListener("keydown", (e) => {
    if (e.key === RESPONSE_KEY && !e.repeat) {
      e.preventDefault();
      engine.press(audio.currentTime);
    } else if ((e.key === "r" || e.key === "R") && engine.state === "playing" && audio.paused) {
      playTrial();
    }
  });
  document.addEventListener("keyup", (e) => {
    if (e.key === RESPONSE_KEY) {
      e.preventDefault();
      engine.release(audio.currentTime);
    }
  });

  byId<HTMLButtonElement>("begin").addEventListener("click", () => {
    engine.beginSession();
    playTrial();
  });

  // Let the operator rescue a half-finished session from the console.
  (window as unknown as Record<string, unknown>).exportPartialResult = () =>
    downloadResult(engine);

  show("screen-instructions");
}

run().catch((err: unknown) => {
  document.body.textContent = `Session cannot start: ${String(err)}`;
});
