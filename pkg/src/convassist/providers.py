"""Hint providers: text-in/text-out adapters behind one small interface.

The mock provider makes the whole pipeline a pure function of its inputs:
it detects tokens repeated within the transcript window and emits a
keyword header plus one canned fact line per keyword. The HTTP adapter
posts the same request shape to an external endpoint.
"""

from __future__ import annotations

import os
import re
from collections import Counter
from importlib import resources
from pathlib import Path
from typing import Protocol

import requests

from .config import ProviderConfig

_TOKEN = re.compile(r"\w+(?:[-']\w+)*")


class ProviderError(RuntimeError):
    pass


class Provider(Protocol):
    def generate(self, system_prompt: str, window_text: str) -> str: ...


def _read_data_file(name: str) -> str:
    return resources.files("convassist.data").joinpath(name).read_text(encoding="utf-8")


def load_fact_table(text: str) -> dict[str, str]:
    """Parse a ``keyword<TAB>fact line`` table; later entries win."""
    table: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, _, fact = line.partition("\t")
        if key and fact:
            table[key.strip().casefold()] = fact.strip()
    return table


def load_lexicon(text: str) -> frozenset[str]:
    words = {line.strip().casefold() for line in text.splitlines()
             if line.strip() and not line.startswith("#")}
    return frozenset(words)


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.casefold())


class MockProvider:
    """Deterministic stand-in for the LLM.

    Tokens seen at least twice in the window (stopwords excluded) become
    keywords, ordered by frequency then lexicographically; each keyword
    gets one fact line from the canned table. No repeats, empty response.
    """

    def __init__(self, fact_table: dict[str, str] | None = None,
                 stopwords: frozenset[str] | None = None,
                 max_keywords: int | None = None):
        if fact_table is None:
            fact_table = load_fact_table(_read_data_file("fact_table.tsv"))
        if stopwords is None:
            stopwords = load_lexicon(_read_data_file("stopwords_en.txt"))
        self.fact_table = fact_table
        self.stopwords = stopwords
        self.max_keywords = max_keywords

    def respond(self, window_text: str) -> str:
        counts = Counter(tok for tok in tokenize(window_text) if tok not in self.stopwords)
        repeated = sorted((tok for tok, n in counts.items() if n >= 2),
                          key=lambda tok: (-counts[tok], tok))
        if self.max_keywords is not None:
            repeated = repeated[: self.max_keywords]
        if not repeated:
            return ""
        parts = ["Keywords: " + ", ".join(repeated)]
        for kw in repeated:
            fact = self.fact_table.get(kw, f"{kw} keeps coming up; ask what got them into it")
            parts.append(f"- {fact}")
        return "\n".join(parts)

    def generate(self, system_prompt: str, window_text: str) -> str:
        return self.respond(window_text)


class HttpProvider:
    """POSTs {system, input} as JSON; expects {"text": ...} or a plain body."""

    def __init__(self, cfg: ProviderConfig):
        if not cfg.http_endpoint:
            raise ValueError("http provider requires http_endpoint")
        self.endpoint = cfg.http_endpoint
        self.timeout_s = cfg.timeout_s
        self.token = os.environ.get(cfg.auth_env, "")

    def generate(self, system_prompt: str, window_text: str) -> str:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        try:
            resp = requests.post(
                self.endpoint,
                json={"system": system_prompt, "input": window_text},
                headers=headers,
                timeout=self.timeout_s,
            )
            resp.raise_for_status()
        except requests.RequestException as exc:
            raise ProviderError(str(exc)) from exc
        content_type = resp.headers.get("Content-Type", "")
        if "json" in content_type:
            body = resp.json()
            return body.get("text", "") if isinstance(body, dict) else str(body)
        return resp.text


def make_provider(cfg: ProviderConfig) -> Provider:
    if cfg.kind == "mock":
        fact_table = None
        stopwords = None
        if cfg.fact_table:
            fact_table = load_fact_table(Path(cfg.fact_table).read_text(encoding="utf-8"))
        if cfg.stopwords:
            stopwords = load_lexicon(Path(cfg.stopwords).read_text(encoding="utf-8"))
        return MockProvider(fact_table=fact_table, stopwords=stopwords)
    if cfg.kind == "http":
        return HttpProvider(cfg)
    raise ValueError(f"unknown provider kind {cfg.kind!r}")
