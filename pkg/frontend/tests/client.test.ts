import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { EngineClient } from "../src/client.js";
import { encodeFrame } from "../src/protocol.js";
import type { Transport, TransportHandlers } from "../src/transport.js";

/** Scripted transport: each connection attempt follows one instruction. */
type Script = "refuse" | "accept";

class FakeLink implements Transport {
  sent: string[] = [];
  constructor(private handlers: TransportHandlers) {}
  send(line: string): void { this.sent.push(line); }
  close(): void {}
  // test hooks
  open(): void { this.handlers.onOpen(); }
  deliver(frame: object): void { this.handlers.onLine(encodeFrame(frame).trimEnd()); }
  drop(reason: string): void { this.handlers.onClose(reason); }
}

function scriptedFactory(script: Script[]) {
  const links: FakeLink[] = [];
  const factory = (_url: string, handlers: TransportHandlers): Transport => {
    const link = new FakeLink(handlers);
    links.push(link);
    const step = script[Math.min(links.length - 1, script.length - 1)];
    queueMicrotask(() => {
      if (step === "refuse") {
        link.drop("connection refused");
      } else {
        link.open();
        link.deliver({ ty: "snapshot", t: 0, proto_version: 1, condition: "face",
                       recognition_enabled: true, panel: null, hints: null, metrics: {} });
      }
    });
    return link;
  };
  return { factory, links };
}

describe("EngineClient", () => {
  beforeEach(() => { vi.useFakeTimers(); });
  afterEach(() => { vi.useRealTimers(); });

  it("handshakes: hello out, snapshot in, status connected", async () => {
    const { factory, links } = scriptedFactory(["accept"]);
    const client = new EngineClient("fake://engine", { factory, baseBackoffMs: 100 });
    client.connect();
    await vi.runAllTimersAsync();
    expect(client.state.status).toBe("connected");
    expect(links).toHaveLength(1);
    expect(links[0].sent[0]).toContain('"ty":"hello"');
    expect(links[0].sent[0]).toContain('"role":"renderer"');
  });

  it("retries with exponential backoff until the engine accepts", async () => {
    const { factory, links } = scriptedFactory(["refuse", "refuse", "accept"]);
    const client = new EngineClient("fake://engine",
                                    { factory, baseBackoffMs: 100, maxBackoffMs: 1000 });
    client.connect();
    await vi.advanceTimersByTimeAsync(0);
    expect(client.state.status).toBe("reconnecting");
    expect(links).toHaveLength(1);

    await vi.advanceTimersByTimeAsync(99); // first retry waits 100 ms
    expect(links).toHaveLength(1);
    await vi.advanceTimersByTimeAsync(1);
    expect(links).toHaveLength(2);

    await vi.advanceTimersByTimeAsync(199); // second retry waits 200 ms
    expect(links).toHaveLength(2);
    await vi.advanceTimersByTimeAsync(1);
    expect(links).toHaveLength(3);

    await vi.runAllTimersAsync();
    expect(client.state.status).toBe("connected");
  });

  it("drops gaze frames while disconnected", async () => {
    const { factory, links } = scriptedFactory(["accept"]);
    const client = new EngineClient("fake://engine", { factory });
    client.connect();
    client.sendGaze(0, 1, 2, true); // handshake not finished yet
    await vi.runAllTimersAsync();
    client.sendGaze(20, 3, 4, true);
    const gazeLines = links[0].sent.filter((l) => l.includes('"ty":"gaze"'));
    expect(gazeLines).toHaveLength(1);
    expect(gazeLines[0]).toContain('"t":20');
  });

  it("treats a protocol version mismatch as fatal", async () => {
    const links: FakeLink[] = [];
    const factory = (_url: string, handlers: TransportHandlers): Transport => {
      const link = new FakeLink(handlers);
      links.push(link);
      queueMicrotask(() => {
        link.open();
        link.deliver({ ty: "error", t: 0, code: "proto_version", detail: "engine speaks 1" });
      });
      return link;
    };
    const client = new EngineClient("fake://engine", { factory, baseBackoffMs: 10 });
    client.connect();
    await vi.runAllTimersAsync();
    expect(client.state.status).toBe("error");
    expect(client.state.errorCode).toBe("proto_version");
    await vi.advanceTimersByTimeAsync(60_000);
    expect(links).toHaveLength(1); // no reconnect attempts after a fatal error
  });

  it("counts undecodable lines instead of crashing", async () => {
    const { factory, links } = scriptedFactory(["accept"]);
    const client = new EngineClient("fake://engine", { factory });
    client.connect();
    await vi.runAllTimersAsync();
    links[0].deliver({ ty: "telemetry", t: 0 });
    expect(client.state.decodeErrors).toBe(1);
    expect(client.state.status).toBe("connected");
  });

  it("close() stops reconnecting and goes idle", async () => {
    const { factory, links } = scriptedFactory(["refuse"]);
    const client = new EngineClient("fake://engine", { factory, baseBackoffMs: 100 });
    client.connect();
    await vi.advanceTimersByTimeAsync(0);
    client.close();
    await vi.advanceTimersByTimeAsync(10_000);
    expect(links).toHaveLength(1);
    expect(client.state.status).toBe("idle");
  });
});
