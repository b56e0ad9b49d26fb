"""Network front end: one engine session per connection, 20 ms tick loop.

A single listening port speaks two transports. Raw TCP clients exchange
newline-delimited JSON frames directly. Browser clients send an HTTP GET:
with a websocket upgrade header the socket switches to RFC 6455 framing
(each text message carries protocol lines); plain GETs serve the optional
static UI directory. Either way the session logic is identical — bytes in,
lines decoded, frames queued to the single-writer session task.

Session state mutates only inside that task (inbound frames, provider
completions, and clock ticks are all queue items), so no locks exist.
"""

from __future__ import annotations

import argparse
import asyncio
import base64
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

from . import protocol
from .config import (CONDITION_FACE, CONDITION_FIXED, PROTO_VERSION, EngineConfig,
                     load_config)
from .engine import SessionEngine
from .ingest import MalformedReplay, MissingFile, read_replay
from .providers import ProviderError, make_provider

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


class _Session:
    """Single-writer loop around one SessionEngine."""

    def __init__(self, cfg: EngineConfig, send_line):
        self.cfg = cfg
        self.provider = make_provider(cfg.provider)
        self.engine = SessionEngine(cfg, request_sink=self._dispatch)
        self.send_line = send_line  # async fn(bytes)
        self.queue: asyncio.Queue = asyncio.Queue()
        self.closed = False

    def _dispatch(self, req, prompt: str) -> None:
        asyncio.get_running_loop().create_task(self._generate(req, prompt))

    async def _generate(self, req, prompt: str) -> None:
        loop = asyncio.get_running_loop()
        if self.cfg.provider.latency_ms > 0:
            await asyncio.sleep(self.cfg.provider.latency_ms / 1000.0)
        try:
            raw = await asyncio.wait_for(
                loop.run_in_executor(None, self.provider.generate, prompt, req.window_text),
                timeout=self.cfg.provider.timeout_s)
        except (ProviderError, asyncio.TimeoutError, OSError):
            return  # degrade: the active bundle stays as-is
        await self.queue.put(("complete", req.seq, raw))

    async def feed_line(self, line: bytes) -> None:
        await self.queue.put(("line", line))

    async def close(self) -> None:
        await self.queue.put(("eof",))

    async def run(self) -> None:
        loop = asyncio.get_running_loop()
        start = loop.time()
        tick_s = self.cfg.tick_ms / 1000.0
        next_tick = start + tick_s

        def now_ms() -> int:
            return int((loop.time() - start) * 1000)

        while not self.closed:
            timeout = max(0.0, next_tick - loop.time())
            try:
                item = await asyncio.wait_for(self.queue.get(), timeout)
            except asyncio.TimeoutError:
                item = None
            if item is None:
                frames = self.engine.tick(now_ms())
                next_tick += tick_s
            elif item[0] == "eof":
                self.closed = True
                break
            elif item[0] == "complete":
                frames = self.engine.complete_hint(item[1], item[2], now_ms())
            else:
                try:
                    msg = protocol.decode(item[1])
                except protocol.DecodeError as exc:
                    frames = [protocol.error(now_ms(), "decode", str(exc))]
                else:
                    frames = self.engine.handle_inbound(msg, now_ms())
            for frame in frames:
                await self.send_line(protocol.encode(frame))


async def _run_tcp_session(cfg: EngineConfig, reader: asyncio.StreamReader,
                           writer: asyncio.StreamWriter, initial: bytes) -> None:
    async def send_line(data: bytes) -> None:
        writer.write(data)
        await writer.drain()

    session = _Session(cfg, send_line)
    runner = asyncio.create_task(session.run())

    async def read_lines() -> None:
        buf = bytearray(initial)
        while True:
            idx = buf.find(b"\n")
            if idx >= 0:
                line = bytes(buf[:idx + 1])
                del buf[:idx + 1]
                if line.strip():
                    await session.feed_line(line)
                continue
            chunk = await reader.read(65536)
            if not chunk:
                break
            buf.extend(chunk)
        await session.close()

    try:
        await read_lines()
        await runner
    finally:
        runner.cancel()
        writer.close()


# ---- websocket framing ----------------------------------------------------


def _ws_accept_value(key: str) -> str:
    digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def ws_text_frame(payload: bytes) -> bytes:
    """Server→client unmasked text frame."""
    n = len(payload)
    if n < 126:
        header = bytes([0x81, n])
    elif n < 1 << 16:
        header = bytes([0x81, 126]) + n.to_bytes(2, "big")
    else:
        header = bytes([0x81, 127]) + n.to_bytes(8, "big")
    return header + payload


def _ws_control_frame(opcode: int, payload: bytes = b"") -> bytes:
    return bytes([0x80 | opcode, len(payload)]) + payload


async def _ws_read_message(reader: asyncio.StreamReader,
                           writer: asyncio.StreamWriter) -> bytes | None:
    """Read one complete (possibly fragmented) data message; None on close."""
    message = bytearray()
    while True:
        head = await reader.readexactly(2)
        fin = bool(head[0] & 0x80)
        opcode = head[0] & 0x0F
        masked = bool(head[1] & 0x80)
        length = head[1] & 0x7F
        if length == 126:
            length = int.from_bytes(await reader.readexactly(2), "big")
        elif length == 127:
            length = int.from_bytes(await reader.readexactly(8), "big")
        mask = await reader.readexactly(4) if masked else b""
        payload = await reader.readexactly(length) if length else b""
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            writer.write(_ws_control_frame(0x8, payload[:125]))
            return None
        if opcode == 0x9:  # ping
            writer.write(_ws_control_frame(0xA, payload[:125]))
            continue
        if opcode == 0xA:  # pong
            continue
        message.extend(payload)
        if fin:
            return bytes(message)


async def _run_ws_session(cfg: EngineConfig, reader: asyncio.StreamReader,
                          writer: asyncio.StreamWriter, headers: dict) -> None:
    accept = _ws_accept_value(headers["sec-websocket-key"])
    writer.write(
        b"HTTP/1.1 101 Switching Protocols\r\n"
        b"Upgrade: websocket\r\n"
        b"Connection: Upgrade\r\n"
        b"Sec-WebSocket-Accept: " + accept.encode("ascii") + b"\r\n\r\n")
    await writer.drain()

    async def send_line(data: bytes) -> None:
        writer.write(ws_text_frame(data))
        await writer.drain()

    session = _Session(cfg, send_line)
    runner = asyncio.create_task(session.run())

    async def read_messages() -> None:
        while True:
            try:
                message = await _ws_read_message(reader, writer)
            except (asyncio.IncompleteReadError, ConnectionError):
                break
            if message is None:
                break
            if not message.endswith(b"\n"):
                message += b"\n"
            for line in message.split(b"\n"):
                if line.strip():
                    await session.feed_line(line + b"\n")
        await session.close()

    try:
        await read_messages()
        await runner
    finally:
        runner.cancel()
        writer.close()


# ---- static UI ------------------------------------------------------------


def _http_response(status: str, body: bytes, content_type: str = "text/plain") -> bytes:
    return (f"HTTP/1.1 {status}\r\n"
            f"Content-Type: {content_type}\r\n"
            f"Content-Length: {len(body)}\r\n"
            f"Connection: close\r\n\r\n").encode("ascii") + body


async def _serve_static(ui_root: Path | None, target: str,
                        writer: asyncio.StreamWriter) -> None:
    if ui_root is None:
        writer.write(_http_response("404 Not Found", b"no UI directory configured\n"))
        return
    rel = target.split("?", 1)[0].lstrip("/")
    candidate = (ui_root / (rel or "index.html")).resolve()
    root = ui_root.resolve()
    if not str(candidate).startswith(str(root) + "/") and candidate != root:
        writer.write(_http_response("403 Forbidden", b"forbidden\n"))
        return
    if candidate.is_dir():
        candidate = candidate / "index.html"
    if not candidate.is_file():
        writer.write(_http_response("404 Not Found", b"not found\n"))
        return
    ctype = _CONTENT_TYPES.get(candidate.suffix.lower(), "application/octet-stream")
    writer.write(_http_response("200 OK", candidate.read_bytes(), ctype))


# ---- listener -------------------------------------------------------------


async def _read_http_head(reader: asyncio.StreamReader, initial: bytes) -> tuple[str, dict]:
    buf = bytearray(initial)
    while b"\r\n\r\n" not in buf:
        chunk = await reader.read(8192)
        if not chunk:
            break
        buf.extend(chunk)
        if len(buf) > 65536:
            raise ValueError("oversized HTTP header")
    head, _, _ = bytes(buf).partition(b"\r\n\r\n")
    lines = head.decode("latin-1").split("\r\n")
    request_line = lines[0]
    headers = {}
    for line in lines[1:]:
        name, _, value = line.partition(":")
        headers[name.strip().lower()] = value.strip()
    return request_line, headers


async def _handle_connection(cfg: EngineConfig, ui_root: Path | None,
                             reader: asyncio.StreamReader,
                             writer: asyncio.StreamWriter) -> None:
    try:
        first = await reader.read(4)
        if not first:
            return
        if first == b"GET ":
            request_line, headers = await _read_http_head(reader, first)
            target = request_line.split(" ")[1] if " " in request_line else "/"
            if headers.get("upgrade", "").lower() == "websocket" and "sec-websocket-key" in headers:
                await _run_ws_session(cfg, reader, writer, headers)
            else:
                await _serve_static(ui_root, target, writer)
                await writer.drain()
                writer.close()
        else:
            await _run_tcp_session(cfg, reader, writer, first)
    except (ConnectionError, asyncio.IncompleteReadError, ValueError):
        writer.close()


async def serve(cfg: EngineConfig, host: str, port: int,
                ui_root: Path | None = None) -> None:
    async def handler(reader, writer):
        await _handle_connection(cfg, ui_root, reader, writer)

    server = await asyncio.start_server(handler, host, port)
    bound = server.sockets[0].getsockname()
    print(f"listening on {bound[0]}:{bound[1]}", flush=True)
    async with server:
        await server.serve_forever()


# ---- headless replay ------------------------------------------------------


def run_replay(cfg: EngineConfig, replay_path: str | Path) -> dict:
    """Stream a replay transcript through one session on a simulated clock."""
    events = read_replay(replay_path)
    engine = SessionEngine(cfg, provider=make_provider(cfg.provider))
    hints_log: list[dict] = []
    engine.on_hint_request = lambda req: hints_log.append(
        {"seq": req.seq, "requested_at": req.issued_at_ms})
    engine.handle_inbound({"ty": "hello", "proto_version": PROTO_VERSION,
                           "role": "driver"})
    updates = []
    duration = (events[-1].t_ms if events else 0) + cfg.provider.latency_ms + 2 * cfg.tick_ms
    i = 0
    t = 0
    while t <= duration:
        while i < len(events) and events[i].t_ms <= t:
            ev = events[i]
            engine.handle_inbound({"ty": "transcript", "t": ev.t_ms, "spk": ev.speaker,
                                   "fin": ev.is_final, "loud": ev.loudness, "text": ev.text})
            i += 1
        for frame in engine.tick(t):
            if frame["ty"] == "hint_update":
                updates.append({"t": frame["t"], "seq": frame["seq"],
                                "keywords": frame["keywords"], "lines": frame["lines"]})
        t += cfg.tick_ms
    return {
        "replay": Path(replay_path).name,
        "condition": cfg.condition,
        "tick_ms": cfg.tick_ms,
        "duration_ms": duration,
        "counters": engine.metrics.to_dict(),
        "hint_requests": hints_log,
        "hint_updates": updates,
    }


# ---- CLI -------------------------------------------------------------------


def _parse_listen(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port:
        raise argparse.ArgumentTypeError("--listen wants host:port")
    try:
        return host, int(port)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_config(args: argparse.Namespace) -> EngineConfig:
    cfg = load_config(args.config) if args.config else EngineConfig()
    if args.provider:
        cfg = dataclasses.replace(cfg, provider=dataclasses.replace(cfg.provider,
                                                                    kind=args.provider))
    if args.condition:
        cfg = dataclasses.replace(cfg, condition=args.condition)
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="convassist-engine",
        description="Conversation-assist session engine (line-JSON over TCP/WebSocket).")
    parser.add_argument("--listen", type=_parse_listen, default=("127.0.0.1", 8787),
                        metavar="ADDR:PORT", help="bind address (default 127.0.0.1:8787)")
    parser.add_argument("--config", default=None, help="engine config .toml/.json")
    parser.add_argument("--provider", choices=["mock", "http"], default=None,
                        help="override configured hint provider")
    parser.add_argument("--replay", default=None, metavar="FILE",
                        help="drive one headless session from a replay transcript and exit")
    parser.add_argument("--condition", choices=[CONDITION_FACE, CONDITION_FIXED],
                        default=None, help="override presentation condition")
    parser.add_argument("--metrics-out", default=None, metavar="PATH",
                        help="write the metrics report JSON here (replay mode)")
    parser.add_argument("--serve-ui", default=None, metavar="DIR",
                        help="also serve this static directory over HTTP on the same port")
    args = parser.parse_args(argv)

    try:
        cfg = build_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.replay:
        try:
            report = run_replay(cfg, args.replay)
        except (MissingFile, MalformedReplay) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        text = json.dumps(report, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
        if args.metrics_out:
            Path(args.metrics_out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0

    ui_root = Path(args.serve_ui) if args.serve_ui else None
    if ui_root is not None and not ui_root.is_dir():
        print(f"error: --serve-ui directory not found: {ui_root}", file=sys.stderr)
        return 2
    host, port = args.listen
    try:
        asyncio.run(serve(cfg, host, port, ui_root))
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
