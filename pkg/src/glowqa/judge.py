"""Exact-match and hierarchical-match scoring of predicted vs. gold answers.

The deterministic exact-match rule always applies; hierarchical match comes
from a judge LLM queried in batches, with a total fallback when the judge
response cannot be parsed twice in a row.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import templates
from .llm import LlmSession

BATCH_SIZE = 25


@dataclass(frozen=True)
class Verdict:
    em: bool
    hm: bool

    @staticmethod
    def make(em: bool, hm: bool) -> "Verdict":
        # em implies hm; repair rather than reject noisy judge output.
        return Verdict(em, hm or em)

    def as_pair(self) -> tuple[int, int]:
        return (int(self.em), int(self.hm))


def normalize(text: str) -> str:
    """Lowercase, drop everything but letters/digits/spaces, collapse runs."""
    lowered = text.lower()
    kept = "".join(ch if ch.isalnum() else (" " if ch.isspace() else "") for ch in lowered)
    return " ".join(kept.split())


def exact_match(predicted: str, gold: str) -> bool:
    return normalize(predicted) == normalize(gold)


def format_pairs(pairs: list[tuple[str, str]]) -> str:
    # Unquoted, like the in-prompt example: [[music, art], [painter, artist]]
    return "[" + ", ".join(f"[{p}, {g}]" for p, g in pairs) + "]"


_PAIR_RE = re.compile(r"\[\s*([01])\s*,\s*([01])\s*\]")


def parse_verdict_pairs(text: str) -> list[tuple[int, int]]:
    return [(int(a), int(b)) for a, b in _PAIR_RE.findall(text)]


def _judge_chunk(pairs: list[tuple[str, str]], llm: LlmSession) -> list[Verdict]:
    user = templates.JUDGE_USER.format(pairs=format_pairs(pairs), count=len(pairs))
    parsed: list[tuple[int, int]] | None = None
    for _ in range(2):  # one re-ask on a count mismatch
        resp = llm.ask(templates.JUDGE_SYSTEM, user)
        got = parse_verdict_pairs(resp.text)
        if len(got) == len(pairs):
            parsed = got
            break
    if parsed is None:
        return [fallback_verdict(p, g) for p, g in pairs]
    return [Verdict.make(bool(e), bool(h)) for e, h in parsed]


def fallback_verdict(predicted: str, gold: str) -> Verdict:
    em = exact_match(predicted, gold)
    return Verdict.make(em, em)


def judge_batch(pairs: list[tuple[str, str]], llm: LlmSession | None) -> list[Verdict]:
    """Score (predicted, gold) pairs; output order matches input order.

    Pairs whose normalized forms are literally equal are exact matches
    regardless of what the judge says.
    """
    if not pairs:
        raise ValueError("judge_batch requires a non-empty pair list")
    verdicts: list[Verdict] = []
    if llm is None:
        verdicts = [fallback_verdict(p, g) for p, g in pairs]
    else:
        for start in range(0, len(pairs), BATCH_SIZE):
            verdicts.extend(_judge_chunk(pairs[start : start + BATCH_SIZE], llm))
    return [
        Verdict.make(v.em or exact_match(p, g), v.hm)
        for v, (p, g) in zip(verdicts, pairs)
    ]
