"""Hint lifecycle: debouncing, response parsing, limits, staleness, expiry."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from convassist.config import GenConfig
from convassist.hints import (HintBundle, HintRequest, HintState, apply_response,
                              build_prompt, bundle_is_valid, expire, make_bundle,
                              maybe_request, parse_provider_response)
from convassist.textseg import grapheme_count

CFG = GenConfig()


# ---- prompt ----------------------------------------------------------------

def test_prompt_carries_display_limit_and_persistence():
    prompt = build_prompt(CFG)
    assert "130 characters or less" in prompt
    assert "300 seconds" in prompt


def test_prompt_tracks_config_values():
    prompt = build_prompt(GenConfig(grapheme_limit=80, persistence_ms=120_000))
    assert "80 characters or less" in prompt
    assert "120 seconds" in prompt


# ---- request debouncing ----------------------------------------------------

def test_first_request_gets_seq_one():
    req = maybe_request(5000, "hello hello", CFG, None)
    assert req == HintRequest(seq=1, window_text="hello hello", issued_at_ms=5000)


def test_no_request_when_recognition_off():
    cfg = GenConfig(recognition_enabled=False)
    assert maybe_request(5000, "hello", cfg, None) is None


def test_no_request_for_empty_window():
    assert maybe_request(5000, "", CFG, None) is None


def test_no_request_for_unchanged_text():
    prev = HintRequest(seq=3, window_text="same text", issued_at_ms=0)
    assert maybe_request(60_000, "same text", CFG, prev) is None


def test_request_rate_limited():
    prev = HintRequest(seq=3, window_text="old", issued_at_ms=10_000)
    assert maybe_request(11_999, "new", CFG, prev) is None
    nxt = maybe_request(12_000, "new", CFG, prev)
    assert nxt is not None and nxt.seq == 4


# ---- response parsing ------------------------------------------------------

def test_parse_structured_response():
    raw = "Keywords: camping, tent\n- Campgrounds fill fast in summer.\n- New tents pitch in minutes."
    keywords, lines = parse_provider_response(raw, CFG)
    assert keywords == ["camping", "tent"]
    assert lines == ["Campgrounds fill fast in summer.", "New tents pitch in minutes."]


def test_parse_numbered_and_unicode_bullets():
    raw = "keyword: 旅行\n1. 新しいキャンプ場が人気です\n・夜は冷えるので注意"
    keywords, lines = parse_provider_response(raw, CFG)
    assert keywords == ["旅行"]
    assert lines == ["新しいキャンプ場が人気です", "夜は冷えるので注意"]


def test_parse_unstructured_prose_falls_back_to_one_line():
    raw = "Camping gear sales\nare up this month."
    keywords, lines = parse_provider_response(raw, CFG)
    assert keywords == []
    assert lines == ["Camping gear sales are up this month."]


def test_parse_empty_response():
    assert parse_provider_response("", CFG) == ([], [])
    assert parse_provider_response("   \n  ", CFG) == ([], [])


def test_parse_clips_long_lines():
    raw = "Keywords: x\n- " + "y" * 400
    _, lines = parse_provider_response(raw, CFG)
    assert grapheme_count(lines[0]) == 130


@given(st.text(max_size=400))
def test_parse_never_emits_overlong_lines(raw):
    _, lines = parse_provider_response(raw, CFG)
    assert all(grapheme_count(line) <= CFG.grapheme_limit for line in lines)


# ---- bundle assembly -------------------------------------------------------

def test_bundle_expiry_anchored_to_creation():
    bundle = make_bundle(1, ["camping"], ["a fact"], created_at_ms=7000, cfg=CFG)
    assert bundle.expires_at_ms == 7000 + 300_000
    assert bundle_is_valid(bundle, CFG)


def test_bundle_synthesizes_keyword_when_missing():
    bundle = make_bundle(1, [], ["Tents pitch fast now."], 0, CFG)
    assert bundle.keywords == ("Tents",)
    assert bundle_is_valid(bundle, CFG)


def test_bundle_clips_lines():
    bundle = make_bundle(1, ["k"], ["z" * 200], 0, CFG)
    assert grapheme_count(bundle.lines[0]) == 130


# ---- staleness and replacement ----------------------------------------------

def mk(seq, created=0):
    return make_bundle(seq, ["k"], [f"line {seq}"], created, CFG)


def test_newer_response_replaces_older():
    state = HintState()
    assert apply_response(state, mk(1))
    assert apply_response(state, mk(2))
    assert state.active.seq == 2


def test_stale_response_discarded():
    state = HintState()
    assert apply_response(state, mk(5))
    assert not apply_response(state, mk(3))
    assert state.active.seq == 5


def test_stale_after_expiry_still_discarded():
    # A slow response that lost the race must not resurrect after expiry.
    state = HintState()
    apply_response(state, mk(5))
    expire(state, 10_000_000)
    assert state.active is None
    assert not apply_response(state, mk(4, created=10_000_001))
    assert state.active is None


def test_out_of_order_completions_keep_newest():
    state = HintState()
    assert apply_response(state, mk(2))
    assert not apply_response(state, mk(1))
    assert state.active.seq == 2


# ---- expiry ----------------------------------------------------------------

def test_expiry_is_strict():
    state = HintState()
    apply_response(state, mk(1, created=0))
    assert not expire(state, 300_000)      # exactly at the boundary: still shown
    assert state.active is not None
    assert expire(state, 300_001)
    assert state.active is None


def test_expire_noop_without_bundle():
    assert not expire(HintState(), 1_000_000)
