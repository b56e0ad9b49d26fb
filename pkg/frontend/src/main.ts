// Browser entry point. Query parameters:
//   ?engine=<url>   engine socket (default: the page's own host)
//   ?gaze=mouse     gaze source: "mouse" (default) or "external"
//   ?demo=off       disable the built-in synthetic partner/chatter

import { EngineClient } from "./client.js";
import { ExternalGazeSource, MouseGazeSource, type GazeSource } from "./gaze.js";
import { toWsUrl, type Vec3 } from "./protocol.js";
import { render } from "./render.js";
import { DEFAULT_STYLE, type GazeSourceKind } from "./viewstate.js";

const TICK_MS = 20; // gaze sampling cadence, matching the engine tick

const params = new URLSearchParams(window.location.search);
const engineRaw = params.get("engine") ?? window.location.host;
const gazeKind = (params.get("gaze") ?? "mouse") as GazeSourceKind;
const demo = params.get("demo") !== "off";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const context2d = canvas.getContext("2d");
if (context2d === null) throw new Error("canvas 2d context unavailable");
const ctx = context2d;

const source: GazeSource = gazeKind === "external"
  ? new ExternalGazeSource()
  : new MouseGazeSource(canvas);

const client = new EngineClient(toWsUrl(engineRaw), { role: "renderer" });
client.connect();

const started = performance.now();
const sessionMs = (): number => Math.round(performance.now() - started);

window.setInterval(() => {
  const point = source.current();
  client.sendGaze(sessionMs(), point.x, point.y, point.valid);
}, TICK_MS);

if (demo) {
  // Synthetic partner: a face 600 mm away swaying gently, so the standalone
  // page exercises the whole pipeline without a separate driver process.
  window.setInterval(() => {
    const t = sessionMs();
    const sway = Math.sin(t / 2400) * 40;
    const le: Vec3 = [-31 + sway, 0, 600];
    const re: Vec3 = [31 + sway, 0, 600];
    const nb: Vec3 = [sway, 35, 600];
    client.sendFace(t, le, re, nb);
  }, 500);

  const chatter = [
    "I went camping last weekend, camping by the lake",
    "we pitched the tent near the lake before dark",
    "the tent held up but the stove kept cutting out",
    "next trip I want to follow the trail up to the ridge",
  ];
  let lineIndex = 0;
  window.setInterval(() => {
    client.sendTranscript(sessionMs(), "U", chatter[lineIndex % chatter.length]);
    lineIndex += 1;
  }, 4000);
}

function frame(): void {
  render(client.state, ctx, canvas.width, canvas.height, DEFAULT_STYLE);
  window.requestAnimationFrame(frame);
}
frame();
