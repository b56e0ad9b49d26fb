"""Grapheme-cluster segmentation and clipping.

Display-line limits are counted in user-perceived characters (extended
grapheme clusters), so a clipped line never ends in half a flag, half a
Hangul syllable, or a dangling combining mark.
"""

from __future__ import annotations

import regex

_CLUSTER = regex.compile(r"\X")


def graphemes(text: str) -> list[str]:
    """Split ``text`` into extended grapheme clusters."""
    if not text:
        return []
    return _CLUSTER.findall(text)


def grapheme_count(text: str) -> int:
    return len(graphemes(text))


def clip_line(text: str, grapheme_limit: int) -> str:
    """Return ``text`` truncated to at most ``grapheme_limit`` clusters.

    Text at or under the limit comes back unchanged; clipping keeps the
    first ``grapheme_limit`` whole clusters.
    """
    if grapheme_limit < 1:
        raise ValueError("grapheme_limit must be >= 1")
    clusters = graphemes(text)
    if len(clusters) <= grapheme_limit:
        return text
    return "".join(clusters[:grapheme_limit])
