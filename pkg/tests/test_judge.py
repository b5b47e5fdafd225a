import pytest
from hypothesis import given, strategies as st

from glowqa.judge import (
    Verdict,
    exact_match,
    format_pairs,
    judge_batch,
    normalize,
    parse_verdict_pairs,
)
from glowqa.llm import LlmSession, MockChatGateway

PAPER_PAIRS = [
    ("music", "art"),
    ("painter", "artist"),
    ("football player", "soccer player"),
    ("lawyer", "judge"),
    ("lawyer", "player"),
]
PAPER_ANSWER = "[[0,1],[0,1],[1,1],[0,1],[0,0]]"
PAPER_VERDICTS = [(0, 1), (0, 1), (1, 1), (0, 1), (0, 0)]


def session(*rules) -> LlmSession:
    mock = MockChatGateway()
    for kind, value, response in rules:
        mock.add(kind, value, response)
    return LlmSession(mock)


def test_normalize_examples():
    assert normalize("Co-Founder ") == "cofounder"
    assert normalize("") == ""
    assert normalize("soccer  player") == "soccer player"
    assert normalize("Sci-Fi!") == "scifi"


@given(st.text(max_size=80))
def test_normalize_idempotent(text):
    assert normalize(normalize(text)) == normalize(text)


def test_exact_match_examples():
    assert exact_match("Organic", "organic") is True
    assert exact_match("lawyer", "player") is False
    assert exact_match("soccer player", "soccer  player") is True


def test_format_pairs_matches_prompt_style():
    assert format_pairs([("music", "art"), ("painter", "artist")]) == (
        "[[music, art], [painter, artist]]"
    )


def test_parse_verdict_pairs():
    assert parse_verdict_pairs(PAPER_ANSWER) == PAPER_VERDICTS
    assert parse_verdict_pairs("[[1, 0], junk [0,1]]") == [(1, 0), (0, 1)]


def test_judge_batch_reference_example():
    llm = session(("substring", "lawyer, player", PAPER_ANSWER))
    verdicts = judge_batch(PAPER_PAIRS, llm)
    assert [v.as_pair() for v in verdicts] == PAPER_VERDICTS


def test_literal_equality_overrides_judge():
    llm = session(("default", "", "[[0,0]]"))
    (verdict,) = judge_batch([("Organic", "organic")], llm)
    assert verdict == Verdict(em=True, hm=True)


def test_em_implies_hm_repair():
    llm = session(("default", "", "[[1,0]]"))
    (verdict,) = judge_batch([("alpha", "beta")], llm)
    assert verdict == Verdict(em=True, hm=True)


def test_wrong_count_twice_falls_back_to_exact_match():
    llm = session(("default", "", "[[1,1]]"))  # always one pair, never three
    pairs = [("a", "a"), ("b", "c"), ("d d", "D  d")]
    verdicts = judge_batch(pairs, llm)
    assert [v.as_pair() for v in verdicts] == [(1, 1), (0, 0), (1, 1)]
    assert len(llm.gateway.requests) == 2  # initial ask plus one re-ask


def test_batches_split_at_25():
    llm = session(("default", "", "[" + ",".join(["[1,1]"] * 25) + "]"))
    pairs = [(f"x{i}", f"x{i}") for i in range(30)]
    verdicts = judge_batch(pairs, llm)
    assert len(verdicts) == 30
    # 25-pair chunk parses on first try; the 5-pair chunk mismatches twice.
    assert len(llm.gateway.requests) == 3


def test_empty_pairs_rejected():
    with pytest.raises(ValueError):
        judge_batch([], session())


def test_no_judge_llm_uses_exact_match():
    verdicts = judge_batch([("a", "a"), ("a", "b")], None)
    assert [v.as_pair() for v in verdicts] == [(1, 1), (0, 0)]


def test_verdict_length_always_matches_pairs():
    llm = session(("default", "", "garbage"))
    pairs = [(str(i), str(i % 2)) for i in range(7)]
    assert len(judge_batch(pairs, llm)) == 7
