"""Evaluation measures: normalizers, turn counting, reading proportion."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convassist.analytics import (EmptyTrace, ReadingMetrics, count_turns,
                                  get_normalizer, grapheme_units, kana_units,
                                  load_filler_lexicon, make_utterance, normalize,
                                  reading_proportion, speech_amount,
                                  utterances_from_replay)
from convassist.fsm import GazeSample
from convassist.geometry import PixelRect


def utt(spk, text, t=0, normalizer="grapheme"):
    return make_utterance(spk, t, None, text, normalizer)


# ---- normalizers -----------------------------------------------------------------

def test_grapheme_units_basic():
    assert grapheme_units("abc") == ["a", "b", "c"]
    assert grapheme_units("") == []
    assert grapheme_units("👨‍👩‍👧") == ["👨‍👩‍👧"]  # joined sequence is one unit


def test_kana_units_small_kana_attach():
    assert kana_units("きゃんぷ") == ["きゃ", "ん", "ぷ"]
    assert kana_units("しょっちゅう") == ["しょ", "っ", "ちゅ", "う"]
    assert kana_units("キャンプ") == ["キャ", "ン", "プ"]


def test_kana_units_own_units():
    assert kana_units("スキー") == ["ス", "キ", "ー"]   # long-vowel mark stands alone
    assert kana_units("ん") == ["ん"]


def test_kana_units_edge_positions():
    assert kana_units("ょし") == ["ょ", "し"]   # nothing to attach to
    assert kana_units("aゃ") == ["a", "ゃ"]     # previous unit is not kana


def test_kana_units_mixed_text_skips_whitespace():
    assert kana_units("テント を buy") == ["テ", "ン", "ト", "を", "b", "u", "y"]
    assert kana_units("   ") == []


def test_normalize_dispatch():
    assert normalize("きゃ", "kana") == ["きゃ"]
    assert normalize("きゃ") == ["き", "ゃ"]
    assert normalize("abc", grapheme_units) == ["a", "b", "c"]
    with pytest.raises(KeyError):
        get_normalizer("words")


# ---- utterances ------------------------------------------------------------------

def test_make_utterance_defaults_and_validation():
    u = make_utterance("U", 1000, None, "hi")
    assert u.end_ms == 1000 and u.normalized_units == ("h", "i")
    u = make_utterance("U", 1000, 2600, "きゃんぷ", "kana")
    assert u.normalized_units == ("きゃ", "ん", "ぷ")
    with pytest.raises(ValueError):
        make_utterance("U", 2000, 1000, "hi")


def test_utterances_from_replay(tmp_path):
    replay = tmp_path / "talk.tsv"
    replay.write_text(
        "# warmup\n"
        "1000\tU\tfinal\t0.8\twe should go camping\t2600\n"
        "1200\tP\tpartial\t-\tuh\n"
        "2000\tP\tfinal\t-\tsounds fun\n",
        encoding="utf-8")
    utts = utterances_from_replay(replay)
    assert [(u.speaker, u.start_ms, u.end_ms) for u in utts] == [
        ("U", 1000, 2600), ("P", 2000, 2000)]
    assert utts[0].text == "we should go camping"


# ---- turn counting ---------------------------------------------------------------

LEX = load_filler_lexicon("en")


def test_lexicon_loading():
    assert "uh-huh" in LEX and "um" in LEX
    ja = load_filler_lexicon("ja")
    assert "うん" in ja and "#" not in "".join(ja)
    both = load_filler_lexicon()
    assert LEX <= both and ja <= both


def test_turns_alternating_conversation():
    convo = [utt("U", "I like soccer"), utt("P", "which team"),
             utt("U", "the local one")]
    stats = count_turns(convo, LEX)
    assert stats.turns_user == 2 and stats.turns_partner == 1


def test_pure_repetition_does_not_take_floor():
    convo = [utt("U", "I like camping"), utt("P", "camping?"),
             utt("U", "yes weekly")]
    stats = count_turns(convo, LEX)
    assert stats.turns_partner == 0
    assert stats.turns_user == 1  # the floor never left the user


def test_filler_only_utterance_counts_no_turn():
    assert count_turns([utt("P", "uh-huh")], LEX).turns_partner == 0
    assert count_turns([utt("P", "uh huh")], LEX).turns_partner == 0
    assert count_turns([utt("P", "um, okay")], LEX).turns_partner == 0


def test_consecutive_same_speaker_counts_once():
    convo = [utt("U", "first thought"), utt("U", "second thought"),
             utt("P", "reply here"), utt("P", "more reply")]
    stats = count_turns(convo, LEX)
    assert stats.turns_user == 1 and stats.turns_partner == 1


def test_repetition_is_multiset_containment():
    convo = [utt("P", "camping camping"), utt("U", "camping")]
    assert count_turns(convo, LEX).turns_user == 0
    convo = [utt("P", "camping"), utt("U", "camping camping")]
    assert count_turns(convo, LEX).turns_user == 1  # more copies than the source


def test_discarded_utterance_is_not_a_reference():
    # P's echo is discarded, so U echoing that echo is measured against
    # P's last *qualifying* utterance (none) and qualifies.
    convo = [utt("U", "I like camping"), utt("P", "camping"), utt("U", "camping")]
    stats = count_turns(convo, LEX)
    assert stats.turns_user == 1 and stats.turns_partner == 0


def test_echo_of_stale_reference_still_excluded():
    convo = [utt("U", "alpha beta"), utt("P", "gamma"), utt("P", "alpha"),
             utt("U", "gamma"), utt("U", "delta")]
    stats = count_turns(convo, LEX)
    # P "alpha" echoes U's last qualifying words; U "gamma" echoes P's.
    assert stats.turns_user == 2 and stats.turns_partner == 1


def test_units_count_every_utterance():
    convo = [utt("U", "abc"), utt("P", "uh-huh"), utt("U", "de")]
    stats = count_turns(convo, LEX)
    assert stats.units_user == 5
    assert stats.units_partner == len("uh-huh")


def test_empty_conversation():
    stats = count_turns([], LEX)
    assert stats == (type(stats))(0, 0, 0, 0)


def test_turnstats_rejects_negatives():
    from convassist.analytics import TurnStats
    with pytest.raises(ValueError):
        TurnStats(units_user=-1, units_partner=0, turns_user=0, turns_partner=0)


CONTENT = ["alpha", "bravo", "charlie", "delta", "echos", "foxtrot", "golfs", "hotel"]
_convo_strategy = st.lists(
    st.tuples(st.sampled_from("UP"),
              st.lists(st.sampled_from(CONTENT), min_size=1, max_size=3)),
    max_size=8)


@settings(max_examples=80, deadline=None)
@given(_convo_strategy, st.data())
def test_filler_insertion_never_changes_turns(convo, data):
    base = [utt(spk, " ".join(words), t=i * 1000)
            for i, (spk, words) in enumerate(convo)]
    before = count_turns(base, LEX)
    padded = list(base)
    for _ in range(data.draw(st.integers(1, 4))):
        pos = data.draw(st.integers(0, len(padded)))
        spk = data.draw(st.sampled_from("UP"))
        padded.insert(pos, utt(spk, "um uh hmm"))
    after = count_turns(padded, LEX)
    assert (after.turns_user, after.turns_partner) == (before.turns_user,
                                                       before.turns_partner)


def test_echo_insertion_never_changes_turns():
    base = [utt("U", "go camping"), utt("P", "nice tent"), utt("U", "rivers")]
    with_echo = [base[0], utt("P", "camping"), base[1], base[2]]
    a, b = count_turns(base, LEX), count_turns(with_echo, LEX)
    assert (a.turns_user, a.turns_partner) == (b.turns_user, b.turns_partner)


# ---- speech amount ---------------------------------------------------------------

def test_speech_amount_by_normalizer():
    convo = [utt("U", "きゃんぷ"), utt("P", "ok")]
    assert speech_amount(convo, "kana") == (3, 2)
    assert speech_amount(convo, "grapheme") == (4, 2)


def test_speech_amount_includes_fillers_and_matches_units():
    convo = [utt("U", "abc"), utt("P", "uh-huh"), utt("U", "de")]
    user, partner = speech_amount(convo, "grapheme")
    stats = count_turns(convo, LEX)
    assert (user, partner) == (stats.units_user, stats.units_partner)


# ---- reading proportion -----------------------------------------------------------

R = PixelRect(x=0.0, y=0.0, w=100.0, h=100.0)
IN = (50.0, 50.0)
OUT = (500.0, 500.0)


def trace(points, tick=20, rects=None):
    gaze = [GazeSample(i * tick, p[0], p[1], valid=(p is not None and p[2]))
            if isinstance(p, tuple) and len(p) == 3
            else GazeSample(i * tick, *(p or (0.0, 0.0)), valid=p is not None)
            for i, p in enumerate(points)]
    rect_trace = [(g.t_ms, R if rects is None else rects[i])
                  for i, g in enumerate(gaze)]
    return gaze, rect_trace


def test_reading_all_inside():
    gaze, rects = trace([IN] * 10)
    m = reading_proportion(gaze, rects)
    assert (m.total_ms, m.in_region_ms, m.proportion) == (200, 200, 1.0)


def test_reading_half_inside():
    gaze, rects = trace([IN] * 5 + [OUT] * 5)
    assert reading_proportion(gaze, rects).proportion == 0.5


def test_invalid_samples_count_toward_total_only():
    gaze, rects = trace([IN, None, IN, None])
    m = reading_proportion(gaze, rects)
    assert m.total_ms == 80 and m.in_region_ms == 40


def test_hidden_region_counts_toward_total_only():
    gaze, _ = trace([IN] * 4)
    rects = [(g.t_ms, None if i % 2 else R) for i, g in enumerate(gaze)]
    m = reading_proportion(gaze, rects)
    assert m.in_region_ms == 40 and m.total_ms == 80


def test_reading_follows_a_moving_region():
    low = PixelRect(x=0.0, y=400.0, w=100.0, h=100.0)
    pts = [IN] * 5 + [(50.0, 450.0)] * 5
    gaze = [GazeSample(i * 20, *p) for i, p in enumerate(pts)]
    rects = [(g.t_ms, R if i < 5 else low) for i, g in enumerate(gaze)]
    assert reading_proportion(gaze, rects).proportion == 1.0


def test_irregular_sampling_weights_by_interval():
    gaze = [GazeSample(0, *IN), GazeSample(100, *OUT), GazeSample(120, *IN)]
    rects = [(g.t_ms, R) for g in gaze]
    m = reading_proportion(gaze, rects)
    # sample dwells until the next one; the last inherits the first interval
    assert m.total_ms == 220 and m.in_region_ms == 200


def test_single_sample_trace():
    m = reading_proportion([GazeSample(0, *IN)], [(0, R)])
    assert m.total_ms == 1 and m.proportion == 1.0


def test_trace_errors():
    with pytest.raises(EmptyTrace):
        reading_proportion([], [])
    with pytest.raises(ValueError, match="mismatch"):
        reading_proportion([GazeSample(0, *IN)], [(0, R), (20, R)])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.booleans(), min_size=2, max_size=40), st.integers(2, 1000))
def test_proportion_invariant_under_time_scaling(flags, k):
    pts = [IN if f else OUT for f in flags]
    gaze = [GazeSample(i * 20, *p) for i, p in enumerate(pts)]
    scaled = [GazeSample(g.t_ms * k, g.x, g.y, g.valid) for g in gaze]
    rects = [(g.t_ms, R) for g in gaze]
    rects_scaled = [(g.t_ms, R) for g in scaled]
    assert (reading_proportion(gaze, rects).proportion
            == reading_proportion(scaled, rects_scaled).proportion)


def test_reading_metrics_validation():
    with pytest.raises(ValueError):
        ReadingMetrics(total_ms=0, in_region_ms=0)
    with pytest.raises(ValueError):
        ReadingMetrics(total_ms=10, in_region_ms=11)
    assert ReadingMetrics(total_ms=10, in_region_ms=3).proportion == 0.3
