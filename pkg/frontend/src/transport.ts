// Transport seam: the client speaks newline-delimited frames over anything
// that can deliver text. The browser uses a WebSocket; tests plug in a raw
// TCP socket or a scripted fake through the same interface.

import { LineBuffer } from "./protocol.js";

export interface TransportHandlers {
  onOpen(): void;
  onLine(line: string): void;
  onClose(reason: string): void;
}

export interface Transport {
  send(line: string): void;
  close(): void;
}

export type TransportFactory = (url: string, handlers: TransportHandlers) => Transport;

export const webSocketTransport: TransportFactory = (url, handlers) => {
  const ws = new WebSocket(url);
  const buffer = new LineBuffer();
  let closed = false;

  ws.onopen = () => handlers.onOpen();
  ws.onmessage = (event) => {
    // A message may carry several newline-separated frames.
    for (const line of buffer.push(String(event.data) + "\n")) {
      handlers.onLine(line);
    }
  };
  ws.onclose = (event) => {
    if (!closed) {
      closed = true;
      handlers.onClose(`closed (${event.code})`);
    }
  };
  ws.onerror = () => {
    // The close event follows and carries the report.
  };

  return {
    send(line: string): void {
      if (ws.readyState === WebSocket.OPEN) ws.send(line);
    },
    close(): void {
      closed = true;
      ws.close();
    },
  };
};
