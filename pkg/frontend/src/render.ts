// Canvas renderer: a pure function of (view state, style). Panel and text
// placement come verbatim from the engine's layout frames -- the only
// geometry computed here is decoration (arc sweep angles, text line spacing).

import type { ViewState, PanelStyle } from "./viewstate.js";
import { DEFAULT_STYLE } from "./viewstate.js";

/** The slice of CanvasRenderingContext2D the renderer draws with. */
export interface Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: CanvasTextAlign;
  textBaseline: CanvasTextBaseline;
  globalAlpha: number;
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
  save(): void;
  restore(): void;
}

const HALF_TURN = Math.PI;
const TOP_ANGLE = -HALF_TURN / 2; // 12 o'clock in canvas angles

/** Start/end canvas angles of one dwell arc; arc 0 starts at 12 o'clock,
 * arcs run clockwise -- the same convention the engine hit-tests with. */
export function arcAngles(arc: number, nArcs: number): [number, number] {
  const step = (2 * HALF_TURN) / nArcs;
  return [TOP_ANGLE + arc * step, TOP_ANGLE + (arc + 1) * step];
}

// Dwell progress frames older than this are a left-over from a hold that
// ended; fade them instead of painting a stale fill forever.
const DWELL_STALE_MS = 300;

export function render(
  state: ViewState, ctx: Canvas2D, width: number, height: number,
  style: PanelStyle = DEFAULT_STYLE,
): void {
  ctx.save();
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#141414";
  ctx.fillRect(0, 0, width, height);

  drawBanner(state, ctx);
  drawIndicator(state, ctx, width);

  const panel = state.panel;
  if (panel === null || !panel.visible) {
    ctx.fillStyle = "#666666";
    ctx.font = "13px sans-serif";
    ctx.textAlign = "center";
    ctx.textBaseline = "middle";
    ctx.fillText(panel === null ? "waiting for partner" : "partner out of view",
                 width / 2, height / 2);
    ctx.restore();
    return;
  }

  const { circle, textRect } = panel;
  drawPartner(ctx, circle.cx, textRect.y, textRect.h);

  // Panel disc: dark purple at the lowest opacity that keeps text readable.
  ctx.globalAlpha = style.opacity;
  ctx.fillStyle = style.background;
  ctx.beginPath();
  ctx.arc(circle.cx, circle.cy, circle.r, 0, 2 * HALF_TURN);
  ctx.fill();
  ctx.globalAlpha = 1;

  drawArcs(state, ctx, style);

  // The text region exactly as the engine placed it.
  ctx.strokeStyle = "rgba(255, 255, 255, 0.28)";
  ctx.lineWidth = 1;
  ctx.strokeRect(textRect.x, textRect.y, textRect.w, textRect.h);

  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  if (state.hints !== null) {
    ctx.fillStyle = "#e8d9ff";
    ctx.font = `${style.fontPx}px sans-serif`;
    ctx.fillText(state.hints.keywords.join(" · "),
                 circle.cx, circle.cy - circle.r + 30);

    ctx.fillStyle = "#ffffff";
    const lineHeight = style.fontPx + 6;
    const centerY = textRect.y + textRect.h / 2;
    const startY = centerY - ((state.hints.lines.length - 1) / 2) * lineHeight;
    state.hints.lines.forEach((line, i) => {
      ctx.fillText(line, textRect.x + textRect.w / 2, startY + i * lineHeight);
    });
  }
  ctx.restore();
}

function drawBanner(state: ViewState, ctx: Canvas2D): void {
  const bits: string[] = [state.status];
  if (state.errorCode !== null) bits.push(`error: ${state.errorCode}`);
  const warnings = state.decodeErrors + state.limitViolations;
  if (warnings > 0) bits.push(`warnings: ${warnings}`);
  ctx.fillStyle = state.status === "connected" ? "#8bd89b"
    : state.status === "error" ? "#e07a7a" : "#d8c77a";
  ctx.font = "13px sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "alphabetic";
  ctx.fillText(bits.join("  —  "), 12, 20);
}

function drawIndicator(state: ViewState, ctx: Canvas2D, width: number): void {
  const label = state.recognitionEnabled ? "recognition on" : "recognition off";
  ctx.fillStyle = state.recognitionEnabled ? "#6ee7a8" : "#888888";
  ctx.fillRect(width - 150, 12, 10, 10);
  ctx.font = "13px sans-serif";
  ctx.textAlign = "left";
  ctx.textBaseline = "alphabetic";
  ctx.fillText(label, width - 134, 21);
}

/** Decorative partner avatar: eyes on the region's top edge (the eye line). */
function drawPartner(ctx: Canvas2D, cx: number, eyeLineY: number, rectH: number): void {
  const headR = rectH * 1.4;
  ctx.strokeStyle = "#4a4a4a";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(cx, eyeLineY + rectH * 0.35, headR, 0, 2 * HALF_TURN);
  ctx.stroke();
  ctx.fillStyle = "#9a9a9a";
  for (const side of [-1, 1]) {
    ctx.beginPath();
    ctx.arc(cx + side * headR * 0.38, eyeLineY, 4, 0, 2 * HALF_TURN);
    ctx.fill();
  }
}

function drawArcs(state: ViewState, ctx: Canvas2D, style: PanelStyle): void {
  const panel = state.panel;
  if (panel === null) return;
  const { cx, cy, r } = panel.circle;
  const innerR = r * style.arcBandRatio;
  const midR = (innerR + r) / 2;
  const bandW = (r - innerR) * 0.9;
  const gap = 0.04; // radians of breathing room between segments

  ctx.lineWidth = bandW;
  for (let k = 0; k < style.nArcs; k += 1) {
    const [a0, a1] = arcAngles(k, style.nArcs);
    ctx.strokeStyle = "rgba(255, 255, 255, 0.30)";
    ctx.beginPath();
    ctx.arc(cx, cy, midR, a0 + gap / 2, a1 - gap / 2);
    ctx.stroke();
  }

  const dwell = state.dwell;
  if (dwell !== null && dwell.frac > 0 && state.lastT - dwell.t <= DWELL_STALE_MS) {
    const [a0, a1] = arcAngles(dwell.arc, style.nArcs);
    const sweep = (a1 - gap / 2 - (a0 + gap / 2)) * Math.min(dwell.frac, 1);
    ctx.strokeStyle = "#c9a2ff";
    ctx.beginPath();
    ctx.arc(cx, cy, midR, a0 + gap / 2, a0 + gap / 2 + sweep);
    ctx.stroke();
  }
}
