// Line-delimited JSON session protocol: one UTF-8 JSON object per line.
// The engine is the source of truth for all state; this module only gives
// the frames names and keeps the byte format in one place.

export const PROTO_VERSION = 1;

export interface Circle {
  cx: number;
  cy: number;
  r: number;
}

export interface TextRect {
  x: number;
  y: number;
  w: number;
  h: number;
}

// Frames the engine sends us.

export interface LayoutUpdate {
  ty: "layout_update";
  t: number;
  circle: Circle;
  text_rect: TextRect;
  lowered: boolean;
  visible: boolean;
}

export interface HintUpdate {
  ty: "hint_update";
  t: number;
  seq: number;
  keywords: string[];
  lines: string[];
  expires_at: number;
}

export interface ToggleState {
  ty: "toggle_state";
  t: number;
  enabled: boolean;
}

export interface ShiftDown {
  ty: "shift_down";
  t: number;
}

export interface ShiftUp {
  ty: "shift_up";
  t: number;
}

export interface DwellProgress {
  ty: "dwell_progress";
  t: number;
  arc: number;
  frac: number;
}

export interface ErrorFrame {
  ty: "error";
  t: number;
  code: string;
  detail: string;
}

export interface SnapshotPanel {
  circle: Circle;
  text_rect: TextRect;
  lowered: boolean;
  visible: boolean;
}

export interface SnapshotHints {
  seq: number;
  keywords: string[];
  lines: string[];
  created_at: number;
  expires_at: number;
}

export interface Snapshot {
  ty: "snapshot";
  t: number;
  proto_version: number;
  condition: string;
  recognition_enabled: boolean;
  panel: SnapshotPanel | null;
  hints: SnapshotHints | null;
  metrics: Record<string, number>;
}

export type EngineFrame =
  | LayoutUpdate
  | HintUpdate
  | ToggleState
  | ShiftDown
  | ShiftUp
  | DwellProgress
  | ErrorFrame
  | Snapshot;

const ENGINE_TYPES = new Set<string>([
  "layout_update", "hint_update", "toggle_state", "shift_down", "shift_up",
  "dwell_progress", "error", "snapshot",
]);

// Frames we send to the engine.

export type Vec3 = [number, number, number];

export function hello(role: "renderer" | "driver") {
  return { ty: "hello", proto_version: PROTO_VERSION, role };
}

export function gaze(t: number, x: number, y: number, valid: boolean) {
  return { ty: "gaze", t, x, y, valid };
}

export function faceObs(t: number, le: Vec3, re: Vec3, nb: Vec3) {
  return { ty: "face_obs", t, le, re, nb };
}

export function transcript(
  t: number, spk: "U" | "P", text: string, fin = true, loud: number | null = null,
) {
  return { ty: "transcript", t, spk, fin, loud, text };
}

export function setCondition(cond: "face" | "fixed") {
  return { ty: "set_condition", cond };
}

export function snapshotRequest() {
  return { ty: "snapshot_request" };
}

export function encodeFrame(frame: object): string {
  return JSON.stringify(frame) + "\n";
}

export class FrameParseError extends Error {}

/** Parse one line from the engine; throws FrameParseError on garbage. */
export function parseFrame(line: string): EngineFrame {
  let value: unknown;
  try {
    value = JSON.parse(line);
  } catch (err) {
    throw new FrameParseError(`not JSON: ${String(err)}`);
  }
  if (typeof value !== "object" || value === null || Array.isArray(value)) {
    throw new FrameParseError("frame is not an object");
  }
  const ty = (value as { ty?: unknown }).ty;
  if (typeof ty !== "string" || !ENGINE_TYPES.has(ty)) {
    throw new FrameParseError(`unknown frame type: ${String(ty)}`);
  }
  return value as EngineFrame;
}

/** Reassembles newline-delimited frames from arbitrary chunk boundaries. */
export class LineBuffer {
  private pending = "";

  push(chunk: string): string[] {
    this.pending += chunk;
    const parts = this.pending.split("\n");
    this.pending = parts.pop() ?? "";
    return parts
      .map((part) => (part.endsWith("\r") ? part.slice(0, -1) : part))
      .filter((part) => part.trim().length > 0);
  }
}

/** Accept "host:port", "http(s)://..." or "ws(s)://..." and return a ws URL. */
export function toWsUrl(raw: string): string {
  if (raw.startsWith("ws://") || raw.startsWith("wss://")) return raw;
  if (raw.startsWith("http://")) return "ws://" + raw.slice("http://".length);
  if (raw.startsWith("https://")) return "wss://" + raw.slice("https://".length);
  return "ws://" + raw;
}
