// Regenerates fixtures/sample-session-result.json by driving a scripted
// session through the real engine against fixtures/sample-manifest.json.
// The injected press/release schedule is appended to the document under
// "_scripted_events" so downstream ingestion tests can compare what the
// runner recorded against what the script performed.
//
// Run via: npm run fixtures

import { readFileSync, writeFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { SessionEngine } from "../src/engine.js";
import { KeyEvent, ManifestTrial } from "../src/types.js";
import { validateManifest, validateResult } from "../src/validate.js";

const FIXTURES = fileURLToPath(new URL("../../fixtures/", import.meta.url));

/** Deterministic two-hold schedule inside the pass-by, empty for stimulus 15. */
function schedule(trial: ManifestTrial): KeyEvent[] {
  if (trial.stimulus_id === 15) return []; // continuous bed: never "noticed"
  const start = 3.0 + 0.05 * trial.stimulus_id;
  return [
    { event: "press", time: start },
    { event: "release", time: start + 2.5 },
    { event: "press", time: start + 4.0 },
    { event: "release", time: start + 6.0 },
  ];
}

function main(): void {
  const manifest = validateManifest(
    JSON.parse(readFileSync(FIXTURES + "sample-manifest.json", "utf-8")),
  );
  const engine = new SessionEngine(manifest, "P00");
  engine.demographics = { age: "29", driving_license: "yes" };

  const scripted: { stimulus_id: number; events: KeyEvent[] }[] = [];
  engine.beginSession();
  for (const trial of manifest.trials) {
    engine.startPlayback();
    const events = schedule(trial);
    engine.release(0.5); // stray release before any press: must be ignored
    for (const ev of events) {
      if (ev.event === "press") {
        engine.press(ev.time);
        engine.press(ev.time + 0.01); // key autorepeat: must be ignored
      } else {
        engine.release(ev.time);
      }
    }
    engine.endPlayback();
    if (!trial.training) scripted.push({ stimulus_id: trial.stimulus_id, events });

    const id = trial.stimulus_id;
    engine.setRating("annoyance", (id * 3) % 11);
    engine.setRating("informativeness", (id * 5 + 2) % 11);
    engine.setRating("noticeability", (id * 7 + 1) % 11);
    engine.submitRatings();
  }

  if (engine.state !== "done") throw new Error("scripted session did not finish");
  const result = validateResult(engine.exportResult());

  // The fixture is only useful if the engine recorded exactly what was
  // scripted, so check that before writing anything.
  const byId = new Map(scripted.map((s) => [s.stimulus_id, s.events]));
  for (const trial of result.trials) {
    if (trial.training) continue;
    const want = byId.get(trial.stimulus_id) ?? [];
    const got = trial.keypress_timeline;
    if (got.length !== want.length) throw new Error(`timeline length drifted for ${trial.stimulus_id}`);
    want.forEach((ev, i) => {
      if (got[i].event !== ev.event || Math.abs(got[i].time - ev.time) > 1e-9) {
        throw new Error(`timeline drifted for stimulus ${trial.stimulus_id} event ${i}`);
      }
    });
  }

  const doc = { ...result, _scripted_events: scripted };
  const out = FIXTURES + "sample-session-result.json";
  writeFileSync(out, JSON.stringify(doc, null, 2) + "\n");
  console.log(`wrote ${out} (${result.trials.length} trials)`);
}

main();
