// Pure view model: the engine owns every decision, the UI folds its frames
// into a plain object and renders it. Nothing here recomputes layout, timing,
// or hint state -- applyFrame is a reducer over engine frames, so replaying a
// recorded frame stream reproduces the exact same states.

import type { Circle, EngineFrame, TextRect } from "./protocol.js";

export type Status = "idle" | "connecting" | "connected" | "reconnecting" | "error";

export type GazeSourceKind = "mouse" | "external";

export interface PanelStyle {
  fontPx: number;
  background: string;
  opacity: number;
  nArcs: number;
  arcBandRatio: number;
  graphemeLimit: number;
}

export const DEFAULT_STYLE: PanelStyle = {
  fontPx: 16,
  background: "#301934", // dark purple behind the text
  opacity: 0.88,
  nArcs: 8,
  arcBandRatio: 0.8,
  graphemeLimit: 130,
};

export interface PanelView {
  t: number;
  circle: Circle;
  textRect: TextRect;
  lowered: boolean;
  visible: boolean;
}

export interface HintsView {
  seq: number;
  keywords: readonly string[];
  lines: readonly string[];
  expiresAt: number;
}

export interface DwellView {
  t: number;
  arc: number;
  frac: number;
}

export interface ViewState {
  status: Status;
  errorCode: string | null;
  condition: string | null;
  recognitionEnabled: boolean;
  panel: PanelView | null;
  hints: HintsView | null;
  dwell: DwellView | null;
  lastT: number;
  frames: number;
  decodeErrors: number;
  limitViolations: number;
}

export function initialState(): ViewState {
  return {
    status: "idle",
    errorCode: null,
    condition: null,
    recognitionEnabled: true,
    panel: null,
    hints: null,
    dwell: null,
    lastT: 0,
    frames: 0,
    decodeErrors: 0,
    limitViolations: 0,
  };
}

const segmenter: Intl.Segmenter | null =
  typeof Intl !== "undefined" && "Segmenter" in Intl
    ? new Intl.Segmenter(undefined, { granularity: "grapheme" })
    : null;

/** Extended grapheme clusters, matching how the engine counts line length. */
export function graphemeCount(text: string): number {
  if (segmenter === null) return [...text].length; // code points, best effort
  let n = 0;
  for (const _ of segmenter.segment(text)) n += 1;
  return n;
}

export function setStatus(
  state: ViewState, status: Status, errorCode: string | null = null,
): ViewState {
  return { ...state, status, errorCode };
}

/** Fold one engine frame into the view state. Pure; never throws. */
export function applyFrame(
  state: ViewState, frame: EngineFrame, graphemeLimit = DEFAULT_STYLE.graphemeLimit,
): ViewState {
  const base: ViewState = {
    ...state,
    lastT: Math.max(state.lastT, "t" in frame ? frame.t : state.lastT),
    frames: state.frames + 1,
  };
  switch (frame.ty) {
    case "layout_update":
      return {
        ...base,
        panel: {
          t: frame.t,
          circle: frame.circle,
          textRect: frame.text_rect,
          lowered: frame.lowered,
          visible: frame.visible,
        },
      };
    case "hint_update": {
      if (frame.lines.length === 0) return { ...base, hints: null };
      // The engine enforces the display limit; an overlong line here means a
      // broken peer, so count it for the banner but keep rendering.
      const over = frame.lines.filter((l) => graphemeCount(l) > graphemeLimit).length;
      return {
        ...base,
        limitViolations: base.limitViolations + over,
        hints: {
          seq: frame.seq,
          keywords: frame.keywords,
          lines: frame.lines,
          expiresAt: frame.expires_at,
        },
      };
    }
    case "toggle_state":
      return { ...base, recognitionEnabled: frame.enabled };
    case "dwell_progress":
      return { ...base, dwell: { t: frame.t, arc: frame.arc, frac: frame.frac } };
    case "shift_down":
    case "shift_up":
      // The accompanying layout_update carries the actual movement.
      return base;
    case "error":
      return { ...base, errorCode: frame.code };
    case "snapshot":
      return {
        ...base,
        condition: frame.condition,
        recognitionEnabled: frame.recognition_enabled,
        panel: frame.panel === null ? null : {
          t: frame.t,
          circle: frame.panel.circle,
          textRect: frame.panel.text_rect,
          lowered: frame.panel.lowered,
          visible: frame.panel.visible,
        },
        hints: frame.hints === null ? null : {
          seq: frame.hints.seq,
          keywords: frame.hints.keywords,
          lines: frame.hints.lines,
          expiresAt: frame.hints.expires_at,
        },
      };
  }
}

export function countDecodeError(state: ViewState): ViewState {
  return { ...state, decodeErrors: state.decodeErrors + 1 };
}
