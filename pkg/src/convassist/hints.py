"""Hint lifecycle: request debouncing, response parsing, display limits, expiry.

A hint bundle is the keyword list plus suggestion lines currently shown to
the user. At most one bundle is active per session; newer responses replace
older ones by sequence number, and a bundle survives until its persistence
window elapses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .config import GenConfig
from .textseg import clip_line, grapheme_count

__all__ = [
    "HintRequest", "HintBundle", "HintState", "UnparseableResponse",
    "build_prompt", "maybe_request", "parse_provider_response",
    "clip_line", "make_bundle", "apply_response", "expire",
]

# System prompt handed to every provider. The display limit and the
# persistence window are substituted from GenConfig.
PROMPT_TEMPLATE = (
    "You are an AI that supports users in having smooth conversations with "
    "others. First, extract distinctive keywords from the input text. Next, "
    "Please provide a concise list of recent news and topics related to the "
    "keywords you have extracted. Please keep each response to {limit} "
    "characters or less. Please avoid overly general content. Also, if there "
    "is no new input, please do not delete it until {seconds} seconds have "
    "passed since the previous response."
)


class UnparseableResponse(ValueError):
    """Provider text had no recognizable structure (handled via fallback)."""


@dataclass(frozen=True)
class HintRequest:
    seq: int
    window_text: str
    issued_at_ms: int


@dataclass(frozen=True)
class HintBundle:
    seq: int
    keywords: tuple[str, ...]
    lines: tuple[str, ...]
    created_at_ms: int
    expires_at_ms: int


@dataclass
class HintState:
    """Per-session mutable hint bookkeeping (single-writer: the session loop)."""

    active: HintBundle | None = None
    last_request: HintRequest | None = None
    max_completed_seq: int = 0


def build_prompt(cfg: GenConfig) -> str:
    seconds = cfg.persistence_ms / 1000
    seconds_text = str(int(seconds)) if seconds == int(seconds) else f"{seconds:g}"
    return PROMPT_TEMPLATE.format(limit=cfg.grapheme_limit, seconds=seconds_text)


def maybe_request(session_now_ms: int, window_text: str, cfg: GenConfig,
                  last_request: HintRequest | None) -> HintRequest | None:
    """Debounce policy: issue a request only for fresh text at a sane rate."""
    if not cfg.recognition_enabled:
        return None
    if not window_text:
        return None
    if last_request is not None:
        if window_text == last_request.window_text:
            return None
        if session_now_ms - last_request.issued_at_ms < cfg.min_request_gap_ms:
            return None
    seq = 1 if last_request is None else last_request.seq + 1
    return HintRequest(seq=seq, window_text=window_text, issued_at_ms=session_now_ms)


_KEYWORD_LINE = re.compile(r"^keywords?\s*[:：]\s*(.*)$", re.IGNORECASE)
_BULLET = re.compile(r"^[-*•・‣]\s*")
_NUMBERED = re.compile(r"^\d+[.)]\s+")


def _structured_parse(raw: str) -> tuple[list[str], list[str]]:
    keywords: list[str] = []
    lines: list[str] = []
    saw_structure = False
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        bullet = _BULLET.match(line) or _NUMBERED.match(line)
        if bullet:
            saw_structure = True
            body = line[bullet.end():].strip()
            if body:
                lines.append(body)
            continue
        kw = _KEYWORD_LINE.match(line)
        if kw:
            saw_structure = True
            keywords.extend(k.strip() for k in re.split(r"[,、]", kw.group(1)) if k.strip())
            continue
        lines.append(line)
    if not saw_structure and lines:
        raise UnparseableResponse("no keyword section or bullet list")
    return keywords, lines


def parse_provider_response(raw: str, cfg: GenConfig) -> tuple[list[str], list[str]]:
    """Split provider text into (keywords, hint lines), clipping every line.

    Responses carrying a keyword section and/or bullet list are parsed by
    that structure; unstructured prose falls back to a single clipped line
    with no keywords. Empty input yields empty lists.
    """
    if not raw.strip():
        return [], []
    try:
        keywords, lines = _structured_parse(raw)
    except UnparseableResponse:
        keywords, lines = [], [" ".join(raw.split())]
    return keywords, [clip_line(line, cfg.grapheme_limit) for line in lines]


def make_bundle(seq: int, keywords: list[str], lines: list[str],
                created_at_ms: int, cfg: GenConfig) -> HintBundle:
    """Assemble a display bundle; every line is held to the grapheme limit."""
    clipped = tuple(clip_line(line, cfg.grapheme_limit) for line in lines)
    kws = tuple(keywords)
    if clipped and not kws:
        # Keywordless responses still need a panel header; reuse the lead word.
        lead = clipped[0].split()
        kws = (lead[0],) if lead else (clipped[0],)
    return HintBundle(
        seq=seq,
        keywords=kws,
        lines=clipped,
        created_at_ms=created_at_ms,
        expires_at_ms=created_at_ms + cfg.persistence_ms,
    )


def apply_response(state: HintState, candidate: HintBundle) -> bool:
    """Install ``candidate`` unless a newer response already completed.

    Returns True when the active bundle changed. Stale completions (lower
    seq than the newest completed one) are discarded without state change.
    """
    if candidate.seq < state.max_completed_seq:
        return False
    if state.active is not None and candidate.seq < state.active.seq:
        return False
    state.max_completed_seq = max(state.max_completed_seq, candidate.seq)
    state.active = candidate
    return True


def expire(state: HintState, session_now_ms: int) -> bool:
    """Clear the active bundle once its persistence window has elapsed."""
    if state.active is not None and session_now_ms > state.active.expires_at_ms:
        state.active = None
        return True
    return False


def bundle_is_valid(bundle: HintBundle, cfg: GenConfig) -> bool:
    """Cheap invariant check used by tests and the session snapshot path."""
    if any(grapheme_count(line) > cfg.grapheme_limit for line in bundle.lines):
        return False
    if bundle.lines and not bundle.keywords:
        return False
    return bundle.expires_at_ms - bundle.created_at_ms == cfg.persistence_ms
