// Live session client: connects, says hello, folds engine frames into the
// view state, and reconnects with exponential backoff when the link drops.
// All user interaction goes out as protocol frames; nothing is decided here.

import {
  encodeFrame, faceObs, gaze, hello, parseFrame, snapshotRequest, transcript,
  type EngineFrame, type Vec3,
} from "./protocol.js";
import {
  applyFrame, countDecodeError, initialState, setStatus, DEFAULT_STYLE,
  type ViewState,
} from "./viewstate.js";
import { webSocketTransport, type Transport, type TransportFactory } from "./transport.js";

export interface ClientOptions {
  role?: "renderer" | "driver";
  factory?: TransportFactory;
  onChange?: (state: ViewState) => void;
  onFrame?: (frame: EngineFrame) => void;
  baseBackoffMs?: number;
  maxBackoffMs?: number;
  graphemeLimit?: number;
}

export class EngineClient {
  state: ViewState = initialState();

  private transport: Transport | null = null;
  private attempts = 0;
  private stopped = true;
  private fatal = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly url: string, private readonly opts: ClientOptions = {}) {}

  connect(): void {
    this.stopped = false;
    this.fatal = false;
    this.open();
  }

  close(): void {
    this.stopped = true;
    if (this.retryTimer !== null) clearTimeout(this.retryTimer);
    this.retryTimer = null;
    this.transport?.close();
    this.transport = null;
    this.update(setStatus(this.state, "idle"));
  }

  /** Drops silently while not connected, by design. */
  sendGaze(t: number, x: number, y: number, valid: boolean): void {
    if (this.state.status === "connected") this.send(gaze(t, x, y, valid));
  }

  sendFace(t: number, le: Vec3, re: Vec3, nb: Vec3): void {
    if (this.state.status === "connected") this.send(faceObs(t, le, re, nb));
  }

  sendTranscript(t: number, spk: "U" | "P", text: string, fin = true,
                 loud: number | null = null): void {
    if (this.state.status === "connected") this.send(transcript(t, spk, text, fin, loud));
  }

  requestSnapshot(): void {
    if (this.state.status === "connected") this.send(snapshotRequest());
  }

  private open(): void {
    const factory = this.opts.factory ?? webSocketTransport;
    this.update(setStatus(this.state, this.attempts === 0 ? "connecting" : "reconnecting"));
    try {
      this.transport = factory(this.url, {
        onOpen: () => {
          this.send(hello(this.opts.role ?? "renderer"));
        },
        onLine: (line) => this.handleLine(line),
        onClose: (reason) => this.handleClose(reason),
      });
    } catch (err) {
      this.handleClose(String(err));
    }
  }

  private handleLine(line: string): void {
    let frame: EngineFrame;
    try {
      frame = parseFrame(line);
    } catch {
      this.update(countDecodeError(this.state));
      return;
    }
    this.opts.onFrame?.(frame);
    let next = applyFrame(this.state, frame,
                          this.opts.graphemeLimit ?? DEFAULT_STYLE.graphemeLimit);
    if (frame.ty === "snapshot" && next.status !== "connected") {
      // The hello reply is a snapshot: the handshake is now complete.
      this.attempts = 0;
      next = setStatus(next, "connected");
    }
    if (frame.ty === "error" && frame.code === "proto_version") {
      // Speaking a different protocol: retrying cannot help.
      this.fatal = true;
      next = setStatus(next, "error", frame.code);
      this.transport?.close();
    }
    this.update(next);
  }

  private handleClose(reason: string): void {
    this.transport = null;
    if (this.stopped || this.fatal) return;
    const base = this.opts.baseBackoffMs ?? 500;
    const cap = this.opts.maxBackoffMs ?? 8000;
    const delay = Math.min(base * 2 ** this.attempts, cap);
    this.attempts += 1;
    this.update(setStatus(this.state, "reconnecting", reason));
    this.retryTimer = setTimeout(() => {
      this.retryTimer = null;
      if (!this.stopped) this.open();
    }, delay);
  }

  private send(frame: object): void {
    this.transport?.send(encodeFrame(frame));
  }

  private update(next: ViewState): void {
    this.state = next;
    this.opts.onChange?.(next);
  }
}
