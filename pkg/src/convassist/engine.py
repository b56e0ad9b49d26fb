"""Per-session engine: wires ingestion, hints, geometry, and the FSM.

The engine is a deterministic state machine advanced by inbound protocol
messages and clock ticks; it never consults a wall clock, never blocks,
and mutates state only inside :meth:`handle_inbound`, :meth:`tick`, and
:meth:`complete_hint` (single-writer). Hint generation is asynchronous
relative to the loop: requests leave through a sink (live mode) or an
internal due-list with configurable latency (embedded/replay mode), and
completions re-enter via :meth:`complete_hint`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

from . import fsm, geometry, hints, protocol
from .config import CONDITION_FACE, CONDITION_FIXED, PROTO_VERSION, EngineConfig
from .geometry import BehindCamera, DegenerateFace, FaceObservation, PixelRect, TextRegion
from .ingest import TranscriptEvent, accumulate_window, filter_event
from .providers import MockProvider, Provider, ProviderError


@dataclass
class MetricsCounters:
    total_ms: int = 0
    in_text_ms: int = 0
    on_face_ms: int = 0
    shift_downs: int = 0
    shift_ups: int = 0
    toggles: int = 0
    hint_requests: int = 0
    hint_completions: int = 0
    hint_updates: int = 0

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        total = max(self.total_ms, 1)
        d["reading_proportion"] = self.in_text_ms / total
        d["on_face_proportion"] = self.on_face_ms / total
        return d


@dataclass
class _Layout:
    rect: PixelRect | None
    circle: fsm.PanelCircle | None
    lowered: bool
    visible: bool

    def frame_fields(self) -> tuple:
        rect = self.rect
        circ = self.circle
        return (
            None if rect is None else (rect.x, rect.y, rect.w, rect.h),
            None if circ is None else (circ.cx, circ.cy, circ.outer_r),
            self.lowered,
            self.visible,
        )


class SessionEngine:
    """One conversation session; owns all mutable state for it."""

    def __init__(self, config: EngineConfig, provider: Provider | None = None,
                 request_sink: Callable[[hints.HintRequest, str], None] | None = None):
        self.cfg = config
        self.provider: Provider = provider if provider is not None else MockProvider()
        self.request_sink = request_sink
        self.condition = config.condition
        self.gen_cfg = config.gen
        self.hello_done = False
        self.now_ms = 0
        self.last_tick_ms: int | None = None

        self.hint_state = hints.HintState()
        self.pstate = fsm.PresentationState()
        self.dstate = fsm.DwellState()
        self.metrics = MetricsCounters()

        self.last_face: FaceObservation | None = None
        self.face_region: TextRegion | None = None
        self.face_rect_px: PixelRect | None = None
        self.world_region: TextRegion | None = None
        self.last_gaze: fsm.GazeSample | None = None

        self._events: list[TranscriptEvent] = []
        self._pending: list[tuple[int, hints.HintRequest, str]] = []
        self._panel: fsm.PanelCircle | None = None
        self._last_layout_key: tuple | None = None
        self._last_dwell_emit: tuple | None = None
        self._prompt = hints.build_prompt(self.gen_cfg)
        # observer hooks for per-tick tables and request logs (replay harness)
        self.on_tick_row: Callable[[dict], None] | None = None
        self.on_hint_request: Callable[[hints.HintRequest], None] | None = None

    # ---- inbound -------------------------------------------------------

    def handle_inbound(self, msg: protocol.ProtocolMessage,
                       now_ms: int | None = None) -> list[protocol.ProtocolMessage]:
        ty = msg.get("ty")
        if ty not in protocol.INBOUND_TYPES:
            return [protocol.error(self.now_ms, "unknown_type", f"{ty!r} is not an inbound type")]
        try:
            protocol.validate(msg)
        except protocol.ProtocolError as exc:
            return [protocol.error(self.now_ms, exc.code, exc.detail)]

        t = int(msg.get("t", self.now_ms if now_ms is None else now_ms))
        self.now_ms = max(self.now_ms, t if now_ms is None else max(t, now_ms))

        if ty == "hello":
            if msg["proto_version"] != PROTO_VERSION:
                return [protocol.error(self.now_ms, "proto_version",
                                       f"engine speaks version {PROTO_VERSION}")]
            self.hello_done = True
            return [self.snapshot()]
        if not self.hello_done:
            return [protocol.error(self.now_ms, "hello_required",
                                   "send hello before other messages")]

        if ty == "face_obs":
            return self._on_face(msg, t)
        if ty == "gaze":
            return self._on_gaze(msg, t)
        if ty == "transcript":
            self._on_transcript(msg, t)
            return []
        if ty == "set_condition":
            self._set_condition(msg["cond"])
            return []
        if ty == "snapshot_request":
            return [self.snapshot()]
        return []  # pragma: no cover - all inbound types handled above

    def _on_face(self, msg: dict, t: int) -> list[protocol.ProtocolMessage]:
        obs = FaceObservation(
            t_ms=t,
            left_eye_outer=tuple(msg["le"]),
            right_eye_outer=tuple(msg["re"]),
            nose_base=tuple(msg["nb"]),
        )
        try:
            region = geometry.face_plane_region(obs, self.cfg.geometry)
        except DegenerateFace as exc:
            return [protocol.error(self.now_ms, "degenerate_face", str(exc))]
        self.last_face = obs
        self.face_region = region
        try:
            self.face_rect_px = geometry.project(region, self.cfg.camera)
        except BehindCamera:
            self.face_rect_px = None
        if self.condition == CONDITION_FIXED and self.world_region is None:
            self.world_region = geometry.world_fixed_region(obs, self.cfg.geometry)
        return []

    def _on_gaze(self, msg: dict, t: int) -> list[protocol.ProtocolMessage]:
        if self.last_gaze is not None and t < self.last_gaze.t_ms:
            t = self.last_gaze.t_ms
        sample = fsm.GazeSample(t_ms=t, x=float(msg["x"]), y=float(msg["y"]),
                                valid=bool(msg["valid"]))
        self.last_gaze = sample
        out: list[protocol.ProtocolMessage] = []
        if self.condition == CONDITION_FACE:
            self.pstate = fsm.fixation_update(self.pstate, sample, self.face_rect_px,
                                              self.cfg.fsm)
        self.dstate, toggled = fsm.dwell_update(self.dstate, sample, self._panel,
                                                self.cfg.fsm)
        if toggled is not None:
            enabled = not self.gen_cfg.recognition_enabled
            self.gen_cfg = dataclasses.replace(self.gen_cfg, recognition_enabled=enabled)
            self.metrics.toggles += 1
            out.append(protocol.toggle_state(self.now_ms, enabled))
        return out

    def _on_transcript(self, msg: dict, t: int) -> None:
        ev = TranscriptEvent(t_ms=t, speaker=msg["spk"], text=msg["text"],
                             is_final=bool(msg["fin"]), loudness=msg.get("loud"))
        kept = filter_event(ev, self.cfg.ingest)
        if kept is not None and kept.is_final:
            self._events.append(kept)

    def _set_condition(self, cond: str) -> None:
        self.condition = cond
        if cond == CONDITION_FIXED and self.world_region is None and self.last_face is not None:
            self.world_region = geometry.world_fixed_region(self.last_face, self.cfg.geometry)

    # ---- tick ----------------------------------------------------------

    def tick(self, now_ms: int) -> list[protocol.ProtocolMessage]:
        now_ms = max(now_ms, self.now_ms)
        self.now_ms = now_ms
        dt = 0 if self.last_tick_ms is None else now_ms - self.last_tick_ms
        out: list[protocol.ProtocolMessage] = []

        out.extend(self._deliver_due(now_ms))

        expired = self.hint_state.active
        if hints.expire(self.hint_state, now_ms):
            out.append(protocol.hint_update(now_ms, expired.seq, [], [],
                                            expired.expires_at_ms))
            self.metrics.hint_updates += 1

        if self.condition == CONDITION_FACE:
            self.pstate, events = fsm.step(self.pstate, now_ms, self.cfg.fsm)
            for ev in events:
                if isinstance(ev, fsm.ShiftDown):
                    self.metrics.shift_downs += 1
                    out.append(protocol.shift_down(now_ms))
                else:
                    self.metrics.shift_ups += 1
                    out.append(protocol.shift_up(now_ms))

        layout = self._compute_layout(now_ms)
        self._panel = layout.circle
        key = layout.frame_fields()
        if layout.rect is not None and key != self._last_layout_key:
            self._last_layout_key = key
            out.append(self._layout_frame(now_ms, layout))

        out.extend(self._maybe_generate(now_ms))
        out.extend(self._dwell_progress_frame(now_ms))
        self._account(dt, layout)
        if self.on_tick_row is not None:
            self.on_tick_row(self._row(now_ms, layout))
        self.last_tick_ms = now_ms
        return out

    def _deliver_due(self, now_ms: int) -> list[protocol.ProtocolMessage]:
        out: list[protocol.ProtocolMessage] = []
        if not self._pending:
            return out
        due = [item for item in self._pending if item[0] <= now_ms]
        self._pending = [item for item in self._pending if item[0] > now_ms]
        for _, req, raw in due:
            out.extend(self.complete_hint(req.seq, raw, now_ms))
        return out

    def _maybe_generate(self, now_ms: int) -> list[protocol.ProtocolMessage]:
        window_ms = self.cfg.ingest.window_ms
        self._events = [ev for ev in self._events if ev.t_ms >= now_ms - window_ms]
        window = accumulate_window(self._events, window_ms, now_ms)
        req = hints.maybe_request(now_ms, window, self.gen_cfg, self.hint_state.last_request)
        if req is None:
            return []
        self.hint_state.last_request = req
        self.metrics.hint_requests += 1
        if self.on_hint_request is not None:
            self.on_hint_request(req)
        if self.request_sink is not None:
            self.request_sink(req, self._prompt)
            return []
        try:
            raw = self.provider.generate(self._prompt, req.window_text)
        except ProviderError:
            return []  # degrade silently; the active bundle stays put
        self._pending.append((now_ms + self.cfg.provider.latency_ms, req, raw))
        return self._deliver_due(now_ms)

    def complete_hint(self, seq: int, raw_text: str,
                      now_ms: int) -> list[protocol.ProtocolMessage]:
        """Fold one provider completion into hint state (stale-safe)."""
        self.metrics.hint_completions += 1
        keywords, lines = hints.parse_provider_response(raw_text, self.gen_cfg)
        if not lines:
            return []
        bundle = hints.make_bundle(seq, keywords, lines, now_ms, self.gen_cfg)
        if not hints.apply_response(self.hint_state, bundle):
            return []
        self.metrics.hint_updates += 1
        return [protocol.hint_update(now_ms, bundle.seq, list(bundle.keywords),
                                     list(bundle.lines), bundle.expires_at_ms)]

    # ---- layout & snapshots ---------------------------------------------

    def _active_region(self) -> TextRegion | None:
        if self.condition == CONDITION_FIXED:
            return self.world_region
        return self.face_region

    def _compute_layout(self, now_ms: int) -> _Layout:
        region = self._active_region()
        if region is None:
            return _Layout(rect=None, circle=None, lowered=False, visible=False)
        lowered = self.condition == CONDITION_FACE and self.pstate.mode == fsm.MODE_LOWERED
        displayed = geometry.apply_shift(region, lowered, self.cfg.geometry)
        try:
            rect = geometry.project(displayed, self.cfg.camera)
        except BehindCamera:
            return _Layout(rect=None, circle=None, lowered=lowered, visible=False)
        if self.condition == CONDITION_FACE:
            visible = (self.last_face is not None
                       and now_ms - self.last_face.t_ms <= self.cfg.geometry.hold_ms)
        else:
            visible = True
        cx, cy = rect.center()
        outer = self.cfg.panel.radius_px
        circle = fsm.PanelCircle(cx=cx, cy=cy,
                                 inner_r=outer * self.cfg.panel.arc_band_ratio,
                                 outer_r=outer)
        return _Layout(rect=rect, circle=circle, lowered=lowered, visible=visible)

    def _layout_frame(self, now_ms: int, layout: _Layout) -> protocol.ProtocolMessage:
        rect = layout.rect
        circ = layout.circle
        return protocol.layout_update(
            now_ms,
            {"cx": circ.cx, "cy": circ.cy, "r": circ.outer_r},
            {"x": rect.x, "y": rect.y, "w": rect.w, "h": rect.h},
            layout.lowered,
            layout.visible,
        )

    def _dwell_progress_frame(self, now_ms: int) -> list[protocol.ProtocolMessage]:
        d = self.dstate
        if d.active_arc is None or d.dwell_accum_ms <= 0:
            return []
        key = (d.active_arc, d.dwell_accum_ms)
        if key == self._last_dwell_emit:
            return []
        self._last_dwell_emit = key
        frac = min(d.dwell_accum_ms / self.cfg.fsm.dwell_threshold_ms, 1.0)
        return [protocol.dwell_progress(now_ms, d.active_arc, frac)]

    def _account(self, dt: int, layout: _Layout) -> None:
        if dt <= 0:
            return
        self.metrics.total_ms += dt
        g = self.last_gaze
        if g is None or not g.valid:
            return
        if layout.visible and layout.rect is not None and layout.rect.contains(g.x, g.y):
            self.metrics.in_text_ms += dt
        if self.face_rect_px is not None and self.face_rect_px.contains(g.x, g.y):
            self.metrics.on_face_ms += dt

    def _row(self, now_ms: int, layout: _Layout) -> dict:
        g = self.last_gaze
        rect = layout.rect
        return {
            "t": now_ms,
            "gaze_x": None if g is None else g.x,
            "gaze_y": None if g is None else g.y,
            "gaze_valid": bool(g.valid) if g is not None else False,
            "rect_x": None if rect is None else rect.x,
            "rect_y": None if rect is None else rect.y,
            "rect_w": None if rect is None else rect.w,
            "rect_h": None if rect is None else rect.h,
            "lowered": layout.lowered,
            "visible": layout.visible,
            "in_text": bool(g is not None and g.valid and layout.visible
                            and rect is not None and rect.contains(g.x, g.y)),
            "on_face": bool(g is not None and g.valid and self.face_rect_px is not None
                            and self.face_rect_px.contains(g.x, g.y)),
        }

    def snapshot(self) -> protocol.ProtocolMessage:
        layout = self._compute_layout(self.now_ms)
        bundle = self.hint_state.active
        panel = None
        if layout.rect is not None:
            circ = layout.circle
            panel = {
                "circle": {"cx": circ.cx, "cy": circ.cy, "r": circ.outer_r},
                "text_rect": {"x": layout.rect.x, "y": layout.rect.y,
                              "w": layout.rect.w, "h": layout.rect.h},
                "lowered": layout.lowered,
                "visible": layout.visible,
            }
        return {
            "ty": "snapshot",
            "t": self.now_ms,
            "proto_version": PROTO_VERSION,
            "condition": self.condition,
            "recognition_enabled": self.gen_cfg.recognition_enabled,
            "panel": panel,
            "hints": None if bundle is None else {
                "seq": bundle.seq,
                "keywords": list(bundle.keywords),
                "lines": list(bundle.lines),
                "created_at": bundle.created_at_ms,
                "expires_at": bundle.expires_at_ms,
            },
            "metrics": self.metrics.to_dict(),
        }
