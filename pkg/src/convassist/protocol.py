"""Session wire protocol: newline-delimited UTF-8 JSON frames.

Every frame is one JSON object per line with a ``ty`` type tag; event
frames carry ``t`` (session milliseconds). Unknown *fields* are ignored
for forward compatibility; unknown *types* are rejected. Encoding sorts
keys so identical messages are byte-identical on the wire.

Inbound:  hello, face_obs, gaze, transcript, set_condition, snapshot_request
Outbound: layout_update, hint_update, toggle_state, shift_down, shift_up,
          dwell_progress, error, snapshot
"""

from __future__ import annotations

import json
from typing import Any, Callable

ProtocolMessage = dict


class DecodeError(ValueError):
    def __init__(self, reason: str, offset: int = 0):
        super().__init__(f"{reason} (byte offset {offset})")
        self.offset = offset


class UnknownType(DecodeError):
    def __init__(self, ty: str):
        super().__init__(f"unknown message type {ty!r}")
        self.ty = ty


class ProtocolError(ValueError):
    """Known type with a malformed payload; the session continues."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


def _is_num(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _num(msg: dict, key: str) -> None:
    if not _is_num(msg.get(key)):
        raise ProtocolError("bad_field", f"{key} must be a number")


def _int(msg: dict, key: str) -> None:
    if not isinstance(msg.get(key), int) or isinstance(msg.get(key), bool):
        raise ProtocolError("bad_field", f"{key} must be an integer")


def _bool(msg: dict, key: str) -> None:
    if not isinstance(msg.get(key), bool):
        raise ProtocolError("bad_field", f"{key} must be a boolean")


def _str(msg: dict, key: str, allowed: tuple[str, ...] | None = None) -> None:
    v = msg.get(key)
    if not isinstance(v, str):
        raise ProtocolError("bad_field", f"{key} must be a string")
    if allowed is not None and v not in allowed:
        raise ProtocolError("bad_field", f"{key} must be one of {allowed}")


def _vec3(msg: dict, key: str) -> None:
    v = msg.get(key)
    if not (isinstance(v, list) and len(v) == 3 and all(_is_num(c) for c in v)):
        raise ProtocolError("bad_field", f"{key} must be [x, y, z]")


def _str_list(msg: dict, key: str) -> None:
    v = msg.get(key)
    if not (isinstance(v, list) and all(isinstance(s, str) for s in v)):
        raise ProtocolError("bad_field", f"{key} must be a list of strings")


def _rect(msg: dict, key: str, fields: tuple[str, ...]) -> None:
    v = msg.get(key)
    if not (isinstance(v, dict) and all(_is_num(v.get(f)) for f in fields)):
        raise ProtocolError("bad_field", f"{key} must carry numbers {fields}")


def _v_hello(m: dict) -> None:
    _int(m, "proto_version")
    _str(m, "role", ("renderer", "driver"))


def _v_face_obs(m: dict) -> None:
    _num(m, "t")
    for key in ("le", "re", "nb"):
        _vec3(m, key)


def _v_gaze(m: dict) -> None:
    _num(m, "t")
    _num(m, "x")
    _num(m, "y")
    _bool(m, "valid")


def _v_transcript(m: dict) -> None:
    _num(m, "t")
    _str(m, "spk", ("U", "P"))
    _bool(m, "fin")
    if m.get("loud") is not None:
        _num(m, "loud")
    _str(m, "text")
    if m["fin"] and not m["text"].strip():
        raise ProtocolError("bad_field", "final transcript text must be non-empty")


def _v_set_condition(m: dict) -> None:
    _str(m, "cond", ("face", "fixed"))


def _v_layout_update(m: dict) -> None:
    _num(m, "t")
    _rect(m, "circle", ("cx", "cy", "r"))
    _rect(m, "text_rect", ("x", "y", "w", "h"))
    _bool(m, "lowered")
    _bool(m, "visible")


def _v_hint_update(m: dict) -> None:
    _num(m, "t")
    _int(m, "seq")
    _str_list(m, "keywords")
    _str_list(m, "lines")
    _num(m, "expires_at")


def _v_toggle_state(m: dict) -> None:
    _num(m, "t")
    _bool(m, "enabled")


def _v_t_only(m: dict) -> None:
    _num(m, "t")


def _v_dwell_progress(m: dict) -> None:
    _num(m, "t")
    _int(m, "arc")
    _num(m, "frac")


def _v_error(m: dict) -> None:
    _num(m, "t")
    _str(m, "code")
    _str(m, "detail")


VALIDATORS: dict[str, Callable[[dict], None]] = {
    # inbound
    "hello": _v_hello,
    "face_obs": _v_face_obs,
    "gaze": _v_gaze,
    "transcript": _v_transcript,
    "set_condition": _v_set_condition,
    "snapshot_request": lambda m: None,
    # outbound
    "layout_update": _v_layout_update,
    "hint_update": _v_hint_update,
    "toggle_state": _v_toggle_state,
    "shift_down": _v_t_only,
    "shift_up": _v_t_only,
    "dwell_progress": _v_dwell_progress,
    "error": _v_error,
    "snapshot": _v_t_only,
}

INBOUND_TYPES = frozenset(
    ["hello", "face_obs", "gaze", "transcript", "set_condition", "snapshot_request"])


def encode(msg: ProtocolMessage) -> bytes:
    """Serialize one message to a single UTF-8 JSON line."""
    ty = msg.get("ty")
    if ty not in VALIDATORS:
        raise UnknownType(str(ty))
    return (json.dumps(msg, ensure_ascii=False, sort_keys=True,
                       separators=(",", ":")) + "\n").encode("utf-8")


def decode(data: bytes) -> ProtocolMessage:
    """Parse one frame; decode(encode(m)) == m for every valid message."""
    text = data.decode("utf-8", errors="strict").strip("\r\n")
    if not text:
        raise DecodeError("empty frame")
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DecodeError(f"invalid JSON: {exc.msg}", offset=exc.pos) from None
    if not isinstance(msg, dict):
        raise DecodeError("frame is not a JSON object")
    ty = msg.get("ty")
    if not isinstance(ty, str):
        raise DecodeError("missing type tag")
    if ty not in VALIDATORS:
        raise UnknownType(ty)
    return msg


def validate(msg: ProtocolMessage) -> None:
    """Check the payload contract for a decoded message (extras are fine)."""
    VALIDATORS[msg["ty"]](msg)


# ---- outbound constructors -------------------------------------------------

def layout_update(t: int, circle: dict, text_rect: dict, lowered: bool,
                  visible: bool) -> ProtocolMessage:
    return {"ty": "layout_update", "t": t, "circle": circle,
            "text_rect": text_rect, "lowered": lowered, "visible": visible}


def hint_update(t: int, seq: int, keywords: list[str], lines: list[str],
                expires_at: int) -> ProtocolMessage:
    return {"ty": "hint_update", "t": t, "seq": seq, "keywords": keywords,
            "lines": lines, "expires_at": expires_at}


def toggle_state(t: int, enabled: bool) -> ProtocolMessage:
    return {"ty": "toggle_state", "t": t, "enabled": enabled}


def shift_down(t: int) -> ProtocolMessage:
    return {"ty": "shift_down", "t": t}


def shift_up(t: int) -> ProtocolMessage:
    return {"ty": "shift_up", "t": t}


def dwell_progress(t: int, arc: int, frac: float) -> ProtocolMessage:
    return {"ty": "dwell_progress", "t": t, "arc": arc, "frac": frac}


def error(t: int, code: str, detail: str) -> ProtocolMessage:
    return {"ty": "error", "t": t, "code": code, "detail": detail}
