"""Automated text checks: forbidden phrases, signal keywords, data dimensions."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Sequence

from .. import resources

DIMENSIONS = ("volume_price", "technical", "capital_flow", "fundamental", "news")


@dataclass(frozen=True)
class Violation:
    phrase: str
    position: int


@dataclass(frozen=True)
class PhraseScan:
    violations: tuple[Violation, ...]
    warnings: tuple[Violation, ...]

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


def forbidden_phrases() -> tuple[str, ...]:
    return resources.read_list("lexicon", "forbidden_phrases.txt")


def transition_words() -> tuple[str, ...]:
    return resources.read_list("lexicon", "transition_words.txt")


def bullish_keywords() -> tuple[str, ...]:
    return resources.read_list("lexicon", "keywords_bullish.txt")


def bearish_keywords() -> tuple[str, ...]:
    return resources.read_list("lexicon", "keywords_bearish.txt")


@lru_cache(maxsize=None)
def _phrase_re(phrase: str) -> re.Pattern:
    # whole-phrase match; flexible whitespace inside multi-word phrases
    body = r"\s+".join(re.escape(w) for w in phrase.split())
    return re.compile(rf"(?<![\w/-]){body}(?![\w/-])", re.IGNORECASE)


def find_phrases(text: str, phrases: Sequence[str]) -> list[Violation]:
    hits = []
    for phrase in phrases:
        for m in _phrase_re(phrase).finditer(text):
            hits.append(Violation(phrase, m.start()))
    return sorted(hits, key=lambda v: (v.position, v.phrase))


def detect_forbidden_phrases(report_text: str, phrases: Sequence[str] | None = None) -> PhraseScan:
    """Scan for avoid-list phrases; transition words come back as warnings.

    The result behaves as the sequence of hard violations.
    """
    return PhraseScan(
        violations=tuple(find_phrases(report_text, forbidden_phrases() if phrases is None else phrases)),
        warnings=tuple(find_phrases(report_text, transition_words())),
    )


def keyword_hits(text: str) -> tuple[list[str], list[str]]:
    """Bullish and bearish keywords present in ``text``."""
    bull = sorted({v.phrase for v in find_phrases(text, bullish_keywords())})
    bear = sorted({v.phrase for v in find_phrases(text, bearish_keywords())})
    return bull, bear


def polarity(text: str) -> str:
    """``bullish``, ``bearish``, ``mixed`` or ``none`` by keyword content."""
    bull, bear = keyword_hits(text)
    if bull and bear:
        return "mixed"
    if bull:
        return "bullish"
    if bear:
        return "bearish"
    return "none"


def default_lexicon() -> dict[str, tuple[str, ...]]:
    data = resources.read_toml("lexicon", "dimension_lexicon.toml")
    return {dim: tuple(data[dim]["keywords"]) for dim in DIMENSIONS if dim in data}


_SENTENCE_SPLIT = re.compile(r"(?<=[.!?;])\s+|\n+")
_NUMERIC = re.compile(r"\d")


def sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_SPLIT.split(text) if s.strip()]


def dimensions_with_data(report_text: str, lexicon: Mapping[str, Sequence[str]] | None = None) -> list[str]:
    lexicon = default_lexicon() if lexicon is None else lexicon
    found = set()
    for sentence in sentences(report_text):
        if not _NUMERIC.search(sentence):
            continue
        for dim, words in lexicon.items():
            if dim not in found and find_phrases(sentence, words):
                found.add(dim)
    return [d for d in lexicon if d in found]


def count_data_dimensions(report_text: str, lexicon: Mapping[str, Sequence[str]] | None = None) -> int:
    """Number of lexicon dimensions with a keyword sharing a sentence with a number."""
    return len(dimensions_with_data(report_text, lexicon))
