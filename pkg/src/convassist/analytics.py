"""Offline evaluation measures: speech amount, turn-taking, reading time.

All functions here are pure batch math over already-textual utterances and
recorded traces. Transcription itself is out of scope; text normalization
is pluggable so the same counting rules work for Japanese kana text (one
unit per kana, small kana attached) and for any other script (one unit per
grapheme cluster).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .fsm import GazeSample
from .geometry import PixelRect
from .ingest import SPEAKER_PARTNER, SPEAKER_USER, read_replay
from .providers import tokenize
from .textseg import graphemes


class EmptyTrace(ValueError):
    """A trace-based metric was asked to summarize zero samples."""


Normalizer = Callable[[str], list[str]]

# Small kana never stand alone: they modify the preceding unit (きゃ is one
# phonetic unit). Sokuon, moraic n, and the long-vowel mark each count as a
# unit of their own, matching how kana text is counted character-wise.
_SMALL_KANA = set("ぁぃぅぇぉゃゅょゎァィゥェォャュョヮ")
_KANA_RANGES = ((0x3041, 0x3096), (0x30A1, 0x30FA))
_KANA_EXTRA = set("ーゝゞヽヾ")


def _is_kana(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _KANA_RANGES) or ch in _KANA_EXTRA


def grapheme_units(text: str) -> list[str]:
    """Identity normalizer: one unit per extended grapheme cluster."""
    return graphemes(text)


def kana_units(text: str) -> list[str]:
    """Kana-table normalizer: one unit per kana, small kana attached.

    Non-kana spans fall back to grapheme clusters so mixed text still
    normalizes; whitespace contributes no units.
    """
    units: list[str] = []
    for cluster in graphemes(text):
        if cluster.isspace():
            continue
        if len(cluster) == 1 and _is_kana(cluster):
            if cluster in _SMALL_KANA and units and _is_kana(units[-1][-1]):
                units[-1] = units[-1] + cluster
                continue
        units.append(cluster)
    return units


NORMALIZERS: dict[str, Normalizer] = {
    "grapheme": grapheme_units,
    "kana": kana_units,
}


def get_normalizer(name: str) -> Normalizer:
    try:
        return NORMALIZERS[name]
    except KeyError:
        raise KeyError(f"unknown normalizer {name!r}; have {sorted(NORMALIZERS)}") from None


def normalize(text: str, normalizer: str | Normalizer = "grapheme") -> list[str]:
    fn = get_normalizer(normalizer) if isinstance(normalizer, str) else normalizer
    return fn(text)


@dataclass(frozen=True)
class Utterance:
    speaker: str
    start_ms: int
    end_ms: int
    text: str
    normalized_units: tuple[str, ...]

    def __post_init__(self):
        if self.start_ms > self.end_ms:
            raise ValueError(f"utterance ends before it starts: {self.start_ms}..{self.end_ms}")


def make_utterance(speaker: str, start_ms: int, end_ms: int | None, text: str,
                   normalizer: str | Normalizer = "grapheme") -> Utterance:
    return Utterance(
        speaker=speaker,
        start_ms=start_ms,
        end_ms=start_ms if end_ms is None else end_ms,
        text=text,
        normalized_units=tuple(normalize(text, normalizer)),
    )


def utterances_from_replay(path, normalizer: str | Normalizer = "grapheme") -> list[Utterance]:
    """Read a replay transcript (finals only, both speakers) as utterances."""
    return [
        make_utterance(ev.speaker, ev.t_ms, ev.end_ms, ev.text, normalizer)
        for ev in read_replay(path)
        if ev.is_final
    ]


@dataclass(frozen=True)
class TurnStats:
    units_user: int
    units_partner: int
    turns_user: int
    turns_partner: int

    def __post_init__(self):
        for name in ("units_user", "units_partner", "turns_user", "turns_partner"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class ReadingMetrics:
    total_ms: int
    in_region_ms: int

    @property
    def proportion(self) -> float:
        return self.in_region_ms / self.total_ms

    def __post_init__(self):
        if self.total_ms <= 0:
            raise ValueError("total_ms must be positive")
        if not 0 <= self.in_region_ms <= self.total_ms:
            raise ValueError("in_region_ms must lie within [0, total_ms]")


def load_filler_lexicon(*languages: str) -> frozenset[str]:
    """Packaged filler-word defaults; pass language codes like "en", "ja"."""
    words: set[str] = set()
    root = importlib.resources.files("convassist.data")
    for lang in languages or ("en", "ja"):
        text = (root / f"fillers_{lang}.txt").read_text(encoding="utf-8")
        for line in text.splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.casefold())
    return frozenset(words)


def _is_filler_only(utt: Utterance, lexicon: frozenset[str]) -> bool:
    tokens = tokenize(utt.text)
    return bool(tokens) and all(tok in lexicon for tok in tokens)


def _is_repetition(utt: Utterance, reference: Utterance | None) -> bool:
    if reference is None:
        return False
    tokens = tokenize(utt.text)
    if not tokens:
        return False
    pool = list(tokenize(reference.text))
    for tok in tokens:
        if tok in pool:
            pool.remove(tok)
        else:
            return False
    return True


def count_turns(utterances: Sequence[Utterance],
                filler_lexicon: frozenset[str] | None = None) -> TurnStats:
    """Per-speaker unit totals and turn counts with exclusion rules.

    An utterance qualifies unless every token is a filler word or its token
    multiset is contained in the other speaker's latest qualifying utterance
    (echoing the partner back does not take the floor, and a discarded
    utterance cannot serve as the reference for later ones — this keeps the
    counts stable under inserting non-qualifying utterances anywhere). A
    speaker's turn count increments on their first qualifying utterance and
    whenever they qualify after the other speaker held the floor.
    """
    if filler_lexicon is None:
        filler_lexicon = load_filler_lexicon()
    units = {SPEAKER_USER: 0, SPEAKER_PARTNER: 0}
    turns = {SPEAKER_USER: 0, SPEAKER_PARTNER: 0}
    last_qualifying: dict[str, Utterance] = {}
    floor_holder: str | None = None
    for utt in utterances:
        units[utt.speaker] += len(utt.normalized_units)
        other = SPEAKER_PARTNER if utt.speaker == SPEAKER_USER else SPEAKER_USER
        if _is_filler_only(utt, filler_lexicon):
            continue
        if _is_repetition(utt, last_qualifying.get(other)):
            continue
        last_qualifying[utt.speaker] = utt
        if floor_holder != utt.speaker:
            turns[utt.speaker] += 1
            floor_holder = utt.speaker
    return TurnStats(
        units_user=units[SPEAKER_USER],
        units_partner=units[SPEAKER_PARTNER],
        turns_user=turns[SPEAKER_USER],
        turns_partner=turns[SPEAKER_PARTNER],
    )


def speech_amount(utterances: Iterable[Utterance],
                  normalizer: str | Normalizer = "grapheme") -> tuple[int, int]:
    """Total normalized units per speaker, fillers included: (user, partner)."""
    totals = {SPEAKER_USER: 0, SPEAKER_PARTNER: 0}
    for utt in utterances:
        totals[utt.speaker] += len(normalize(utt.text, normalizer))
    return totals[SPEAKER_USER], totals[SPEAKER_PARTNER]


def reading_proportion(gaze_trace: Sequence[GazeSample],
                       text_rect_trace: Sequence[tuple[int, PixelRect | None]]) -> ReadingMetrics:
    """Share of session time spent with gaze inside the active text region.

    Traces are index-aligned per-tick records over the same span. A sample
    counts as in-region only when the gaze is valid and the region is shown
    at that instant; every sample counts toward the total, so dropout
    lowers the proportion rather than hiding it.
    """
    if not gaze_trace or not text_rect_trace:
        raise EmptyTrace("both traces must contain at least one sample")
    if len(gaze_trace) != len(text_rect_trace):
        raise ValueError(
            f"trace length mismatch: {len(gaze_trace)} gaze vs {len(text_rect_trace)} rect")
    n = len(gaze_trace)
    if n >= 2:
        tick = gaze_trace[1].t_ms - gaze_trace[0].t_ms
        dts = [gaze_trace[i + 1].t_ms - gaze_trace[i].t_ms for i in range(n - 1)]
        dts.append(tick if tick > 0 else 1)
    else:
        dts = [1]
    total = 0
    inside = 0
    for (g, (_, rect)), dt in zip(zip(gaze_trace, text_rect_trace), dts):
        total += dt
        if g.valid and rect is not None and rect.contains(g.x, g.y):
            inside += dt
    return ReadingMetrics(total_ms=total, in_region_ms=inside)
