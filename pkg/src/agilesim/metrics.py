"""Transcript quality metrics.

Definitions (all deterministic, all computed over :func:`normalize_text` tokens):

unique_content_pct
    100 * distinct token sequences / messages.
diversity_score
    distinct tokens / total tokens over the whole transcript.
completion_score
    100 * fraction of scenario objectives matched.
sentiment_stability
    Each message is positive, negative or neutral by the sign of
    (positive hits - negative hits). Score is 100 * adjacent pairs with an
    unchanged class / (messages - 1); 100 for one message or none.
context_retention
    Message i >= 1 is retained when its non-stopword tokens meet the union of
    non-stopword tokens of all earlier messages. Score is
    100 * retained / (messages - 1); 100 for one message or none.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from agilesim import canonical as cj
from agilesim.errors import ConfigError, EmptyTranscript
from agilesim.scenario import Scenario, evaluate_objectives
from agilesim.transcript import Transcript

_TOKEN = re.compile(r"[^\W_]+")

STOPWORDS = frozenset(
    """
    a an the and or but if of to in on at by for with from as is are was were
    be been it its this that these those we you i he she they our your my their
    not no so do does can will would should have has
    """.split()
)


def normalize_text(s: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return _TOKEN.findall(s.lower())


@dataclass(frozen=True)
class SentimentLexicon:
    positive: frozenset[str]
    negative: frozenset[str]

    def __post_init__(self) -> None:
        overlap = self.positive & self.negative
        if overlap:
            raise ConfigError(f"lexicon words both positive and negative: {sorted(overlap)}")
        upper = [w for w in self.positive | self.negative if w != w.lower()]
        if upper:
            raise ConfigError(f"lexicon entries must be lowercase: {sorted(upper)}")

    @classmethod
    def from_dict(cls, obj: Any) -> "SentimentLexicon":
        obj = cj.expect_object(obj, "")
        return cls(
            frozenset(cj.expect_str_list(cj.get(obj, "positive", ""), "positive")),
            frozenset(cj.expect_str_list(cj.get(obj, "negative", ""), "negative")),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SentimentLexicon":
        return cls.from_dict(cj.load_file(path))

    @classmethod
    def default(cls) -> "SentimentLexicon":
        text = resources.files("agilesim").joinpath("data/lexicon.json").read_text("utf-8")
        return cls.from_dict(cj.loads(text, "data/lexicon.json"))


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Stopword override file: a JSON array of lowercase words."""
    return frozenset(w.lower() for w in cj.expect_str_list(cj.load_file(path), ""))


class Sentiment(int, Enum):
    NEGATIVE = -1
    NEUTRAL = 0
    POSITIVE = 1


@dataclass(frozen=True)
class MetricsReport:
    unique_content_pct: float
    diversity_score: float
    completion_score: float
    sentiment_stability: float
    context_retention: float

    FIELDS = (
        "unique_content_pct",
        "diversity_score",
        "completion_score",
        "sentiment_stability",
        "context_retention",
    )

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in self.FIELDS)

    def formatted(self) -> dict[str, str]:
        return {f: f"{getattr(self, f):.2f}" for f in self.FIELDS}

    def to_dict(self) -> dict[str, float]:
        """Values rounded to two decimals, as written to metrics.json."""
        return {f: round(getattr(self, f), 2) for f in self.FIELDS}


def unique_content_pct(transcript: Transcript) -> float:
    if not transcript:
        raise EmptyTranscript()
    distinct = {tuple(normalize_text(m.content)) for m in transcript}
    return 100.0 * len(distinct) / len(transcript)


def diversity_score(transcript: Transcript) -> float:
    tokens = [t for m in transcript for t in normalize_text(m.content)]
    if not tokens:
        raise EmptyTranscript("transcript has no tokens")
    return len(set(tokens)) / len(tokens)


def classify(tokens: Iterable[str], lexicon: SentimentLexicon) -> Sentiment:
    score = 0
    for t in tokens:
        if t in lexicon.positive:
            score += 1
        elif t in lexicon.negative:
            score -= 1
    if score > 0:
        return Sentiment.POSITIVE
    if score < 0:
        return Sentiment.NEGATIVE
    return Sentiment.NEUTRAL


def stability_of(classes: list[Sentiment]) -> float:
    if len(classes) <= 1:
        return 100.0
    same = sum(1 for a, b in zip(classes, classes[1:]) if a == b)
    return 100.0 * same / (len(classes) - 1)


def sentiment_stability(transcript: Transcript, lexicon: SentimentLexicon | None = None) -> float:
    lexicon = lexicon or SentimentLexicon.default()
    return stability_of([classify(normalize_text(m.content), lexicon) for m in transcript])


def context_retention(transcript: Transcript, stopwords: frozenset[str] = STOPWORDS) -> float:
    if len(transcript) <= 1:
        return 100.0
    seen: set[str] = set()
    retained = 0
    for i, m in enumerate(transcript):
        content = {t for t in normalize_text(m.content) if t not in stopwords}
        if i > 0 and content & seen:
            retained += 1
        seen |= content
    return 100.0 * retained / (len(transcript) - 1)


def compute_metrics(
    transcript: Transcript,
    scenario: Scenario,
    lexicon: SentimentLexicon | None = None,
    stopwords: frozenset[str] = STOPWORDS,
) -> MetricsReport:
    if not transcript:
        raise EmptyTranscript()
    lexicon = lexicon or SentimentLexicon.default()
    return MetricsReport(
        unique_content_pct=unique_content_pct(transcript),
        diversity_score=diversity_score(transcript),
        completion_score=100.0 * evaluate_objectives(scenario, transcript),
        sentiment_stability=sentiment_stability(transcript, lexicon),
        context_retention=context_retention(transcript, stopwords),
    )
