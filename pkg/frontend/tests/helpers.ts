// Shared test gear: a recording canvas, a TCP line transport (the browser
// uses WebSocket; tests talk to the engine's plain socket directly), and a
// helper that boots the real Python engine on an ephemeral port.

import { spawn, type ChildProcess } from "node:child_process";
import net from "node:net";
import path from "node:path";
import { fileURLToPath } from "node:url";

import { LineBuffer, type Circle } from "../src/protocol.js";
import type { Canvas2D } from "../src/render.js";
import type { TransportFactory } from "../src/transport.js";

export interface DrawOp {
  op: string;
  args: (string | number)[];
}

export class FakeCtx implements Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern = "";
  strokeStyle: string | CanvasGradient | CanvasPattern = "";
  lineWidth = 0;
  font = "";
  textAlign: CanvasTextAlign = "left";
  textBaseline: CanvasTextBaseline = "alphabetic";
  globalAlpha = 1;
  ops: DrawOp[] = [];

  private log(op: string, ...args: (string | number)[]): void {
    this.ops.push({ op, args });
  }

  clearRect(x: number, y: number, w: number, h: number): void { this.log("clearRect", x, y, w, h); }
  fillRect(x: number, y: number, w: number, h: number): void { this.log("fillRect", x, y, w, h); }
  strokeRect(x: number, y: number, w: number, h: number): void { this.log("strokeRect", x, y, w, h); }
  beginPath(): void { this.log("beginPath"); }
  arc(x: number, y: number, r: number, a0: number, a1: number): void { this.log("arc", x, y, r, a0, a1); }
  fill(): void { this.log("fill"); }
  stroke(): void { this.log("stroke"); }
  fillText(text: string, x: number, y: number): void { this.log("fillText", text, x, y); }
  save(): void { this.log("save"); }
  restore(): void { this.log("restore"); }

  texts(): string[] {
    return this.ops.filter((o) => o.op === "fillText").map((o) => String(o.args[0]));
  }

  find(op: string): DrawOp[] {
    return this.ops.filter((o) => o.op === op);
  }
}

/** Line transport over a raw TCP socket, for driving the engine from node. */
export function tcpFactory(port: number): TransportFactory {
  return (_url, handlers) => {
    const socket = net.connect(port, "127.0.0.1");
    socket.setNoDelay(true);
    const buffer = new LineBuffer();
    socket.on("connect", () => handlers.onOpen());
    socket.on("data", (chunk) => {
      for (const line of buffer.push(chunk.toString("utf-8"))) {
        handlers.onLine(line);
      }
    });
    socket.on("close", () => handlers.onClose("socket closed"));
    socket.on("error", () => { /* close follows */ });
    return {
      send: (line: string) => { socket.write(line); },
      close: () => { socket.destroy(); },
    };
  };
}

export interface EngineHandle {
  port: number;
  proc: ChildProcess;
  stop(): void;
}

const REPO_ROOT = path.resolve(path.dirname(fileURLToPath(import.meta.url)), "..", "..");

/** Boot the real engine on an ephemeral port and wait for its listen line. */
export function startEngine(extraArgs: string[] = []): Promise<EngineHandle> {
  return new Promise((resolve, reject) => {
    const proc = spawn("python3", ["-m", "convassist.server",
                                   "--listen", "127.0.0.1:0", ...extraArgs],
                       { cwd: REPO_ROOT, stdio: ["ignore", "pipe", "pipe"] });
    let out = "";
    let errOut = "";
    const timer = setTimeout(() => {
      proc.kill();
      reject(new Error(`engine never announced its port; stderr: ${errOut}`));
    }, 10_000);
    proc.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString("utf-8");
      const match = /listening on 127\.0\.0\.1:(\d+)/.exec(out);
      if (match !== null) {
        clearTimeout(timer);
        resolve({ port: Number(match[1]), proc, stop: () => { proc.kill(); } });
      }
    });
    proc.stderr!.on("data", (chunk: Buffer) => { errOut += chunk.toString("utf-8"); });
    proc.on("error", (err) => { clearTimeout(timer); reject(err); });
  });
}

export async function waitFor(
  predicate: () => boolean, what: string, timeoutMs = 8000, stepMs = 5,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((r) => setTimeout(r, stepMs));
  }
  throw new Error(`timed out waiting for ${what}`);
}

/** Center of a dwell arc, mirroring the engine's hit-test convention:
 * arc 0 starts at 12 o'clock, arcs run clockwise, band between 0.8r and r. */
export function arcCenter(
  circle: Circle, arc: number, nArcs = 8, bandRatio = 0.8,
): { x: number; y: number } {
  const angle = ((arc + 0.5) / nArcs) * 2 * Math.PI;
  const radius = (circle.r * bandRatio + circle.r) / 2;
  return {
    x: circle.cx + radius * Math.sin(angle),
    y: circle.cy - radius * Math.cos(angle),
  };
}

// The canonical frontal test face: eyes level 600 mm out, nose below.
export const FACE = {
  le: [-31, 0, 600] as [number, number, number],
  re: [31, 0, 600] as [number, number, number],
  nb: [0, 35, 600] as [number, number, number],
};

// A point safely inside that face's projected fixation region.
export const FACE_POINT = { x: 480, y: 340 };
