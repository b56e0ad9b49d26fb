"""Transcript ingestion: replay-file parsing, speaker filtering, windowing.

Both the live provider client and the deterministic replay source are
normalized into one stream of speaker-tagged :class:`TranscriptEvent`.
The replay format is UTF-8 text, one event per line::

    t_ms<TAB>speaker<TAB>final|partial<TAB>loudness|-<TAB>text[<TAB>end_ms]

with ``speaker`` in {U, P}. Lines starting with ``#`` are comments. The
trailing ``end_ms`` column is optional and only used by analytics. Text
must not contain tabs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .config import IngestConfig

SPEAKER_USER = "U"
SPEAKER_PARTNER = "P"


class MalformedReplay(ValueError):
    """Replay file violates the line format; carries the line number."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class MissingFile(FileNotFoundError):
    pass


@dataclass(frozen=True)
class TranscriptEvent:
    t_ms: int
    speaker: str  # SPEAKER_USER | SPEAKER_PARTNER
    text: str
    is_final: bool
    loudness: float | None = None
    end_ms: int | None = None


def _parse_line(line_no: int, line: str) -> TranscriptEvent:
    parts = line.split("\t")
    if len(parts) not in (5, 6):
        raise MalformedReplay(line_no, f"expected 5 or 6 tab-separated fields, got {len(parts)}")
    t_raw, speaker, kind, loud_raw, text = parts[:5]
    try:
        t_ms = int(t_raw)
    except ValueError:
        raise MalformedReplay(line_no, f"bad t_ms {t_raw!r}") from None
    if speaker not in (SPEAKER_USER, SPEAKER_PARTNER):
        raise MalformedReplay(line_no, f"bad speaker {speaker!r}, expected U or P")
    if kind not in ("final", "partial"):
        raise MalformedReplay(line_no, f"bad kind {kind!r}, expected final or partial")
    is_final = kind == "final"
    loudness: float | None
    if loud_raw == "-":
        loudness = None
    else:
        try:
            loudness = float(loud_raw)
        except ValueError:
            raise MalformedReplay(line_no, f"bad loudness {loud_raw!r}") from None
        if not 0.0 <= loudness <= 1.0:
            raise MalformedReplay(line_no, f"loudness {loudness} outside [0, 1]")
    if is_final and not text.strip():
        raise MalformedReplay(line_no, "final event with empty text")
    end_ms: int | None = None
    if len(parts) == 6:
        try:
            end_ms = int(parts[5])
        except ValueError:
            raise MalformedReplay(line_no, f"bad end_ms {parts[5]!r}") from None
        if end_ms < t_ms:
            raise MalformedReplay(line_no, f"end_ms {end_ms} precedes t_ms {t_ms}")
    return TranscriptEvent(t_ms=t_ms, speaker=speaker, text=text, is_final=is_final,
                           loudness=loudness, end_ms=end_ms)


def parse_replay(text: str) -> list[TranscriptEvent]:
    """Parse replay-format text into events, enforcing t_ms monotonicity."""
    events: list[TranscriptEvent] = []
    last_t: int | None = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        ev = _parse_line(line_no, line)
        if last_t is not None and ev.t_ms < last_t:
            raise MalformedReplay(line_no, f"t_ms {ev.t_ms} out of order (previous {last_t})")
        last_t = ev.t_ms
        events.append(ev)
    return events


def read_replay(path: str | Path) -> list[TranscriptEvent]:
    """Parse a replay file into its event list, validating the whole file."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(str(path))
    return parse_replay(path.read_text(encoding="utf-8"))


def open_replay(path: str | Path) -> Iterator[TranscriptEvent]:
    """Yield the events of a replay file in file order.

    Identical files yield identical streams. The whole file is validated
    up front so malformed lines are reported before any event is consumed.
    """
    return iter(read_replay(path))


def filter_event(ev: TranscriptEvent, cfg: IngestConfig) -> TranscriptEvent | None:
    """Apply the user-only channel filter; returns the event unchanged or None."""
    if cfg.user_only:
        if ev.speaker == SPEAKER_PARTNER:
            return None
        if ev.loudness is not None and ev.loudness < cfg.loudness_threshold:
            return None
    return ev


def accumulate_window(events: list[TranscriptEvent], window_ms: int, now_ms: int) -> str:
    """Space-join the texts of final events from the last ``window_ms``.

    Only events with ``now_ms - window_ms <= t_ms <= now_ms`` contribute,
    in chronological order. Partial hypotheses never reach the window.
    """
    if window_ms <= 0:
        raise ValueError("window_ms must be positive")
    lo = now_ms - window_ms
    texts = [ev.text for ev in events
             if ev.is_final and lo <= ev.t_ms <= now_ms]
    return " ".join(texts)
