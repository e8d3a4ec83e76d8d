"""Sentence-level sentiment and intention properties of feedback messages.

Each message is split into sentences; each sentence gets a polarity with a
strength in [0, 1] and a binary feature-request intent. Message-level
properties then average negativity over negative sentences only, positivity
over positive sentences only, and intent over all sentences, so one shrill
sentence is not diluted by the rest of the review.

Scores come from a small shipped valence lexicon and a rule list by default;
a CSV of externally computed sentence scores can override any subset of rows.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .corpus import FeedbackMessage
from .errors import ParseError
from .textkit import normalize

logger = logging.getLogger(__name__)

# Tokens that end with '.' without ending a sentence.
_ABBREVIATIONS = frozenset({"e.g", "i.e", "etc", "mr", "mrs", "dr", "vs", "st", "approx", "v"})

_SENTENCE_END = re.compile(r"([.!?]+)(\s+|$)")

POSITIVE = "pos"
NEGATIVE = "neg"
NEUTRAL = "neu"

# Full valence mass at this many average lexicon points per matched token.
_SATURATION_VALENCE = 4.0


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation, keeping it, with an abbreviation guard.

    A trailing fragment without terminal punctuation counts as a sentence.
    """
    sentences: list[str] = []
    start = 0
    for match in _SENTENCE_END.finditer(text):
        candidate = text[start : match.end(1)]
        last_word = candidate[: match.start(1) - start].rstrip().rsplit(None, 1)
        if match.group(1) == "." and last_word and last_word[-1].lower().strip(".") in _ABBREVIATIONS:
            continue
        stripped = candidate.strip()
        if stripped:
            sentences.append(stripped)
        start = match.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class SentenceScore:
    """Polarity, polarity strength in [0, 1], and request intent of one sentence."""

    polarity: str
    score: float
    intent: float

    def __post_init__(self):
        if self.polarity not in (POSITIVE, NEGATIVE, NEUTRAL):
            raise ValueError(f"unknown polarity {self.polarity!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if not 0.0 <= self.intent <= 1.0:
            raise ValueError(f"intent {self.intent} outside [0, 1]")


NEUTRAL_SCORE = SentenceScore(polarity=NEUTRAL, score=0.0, intent=0.0)


class SentenceScorer(Protocol):
    def score_sentence(self, sentence: str) -> SentenceScore: ...


def load_lexicon(path: str | Path | None = None) -> dict[str, float]:
    """Read a ``token,valence`` lexicon; the shipped one when no path is given."""
    if path is None:
        text = resources.files("feedprio.data").joinpath("sentiment_lexicon.txt").read_text("utf-8")
        source = "shipped lexicon"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    lexicon: dict[str, float] = {}
    for i, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        token, _, valence = line.rpartition(",")
        try:
            lexicon[token.strip().lower()] = float(valence)
        except ValueError as exc:
            raise ParseError(f"{source} line {i}: bad valence {valence!r}") from exc
    if not lexicon:
        raise ParseError(f"{source}: no lexicon entries")
    return lexicon


class LexiconSentimentScorer:
    """Valence-sum sentiment with strength saturating at a few strong words.

    Polarity is the sign of the summed valence of matched tokens; strength is
    |sum| scaled by the matched-token count so that an average valence of
    ``_SATURATION_VALENCE`` (the lexicon's maximum) pegs the score at 1.
    """

    def __init__(self, lexicon: Mapping[str, float] | None = None, intent_scorer: "RuleIntentScorer | None" = None):
        self.lexicon = dict(lexicon) if lexicon is not None else load_lexicon()
        self.intent_scorer = intent_scorer or RuleIntentScorer()

    def score_sentence(self, sentence: str) -> SentenceScore:
        tokens = normalize(sentence, stopwords=frozenset())
        matched = [self.lexicon[t] for t in tokens if t in self.lexicon]
        intent = self.intent_scorer.score(sentence)
        if not matched:
            return SentenceScore(polarity=NEUTRAL, score=0.0, intent=intent)
        total = sum(matched)
        if total == 0:
            return SentenceScore(polarity=NEUTRAL, score=0.0, intent=intent)
        strength = min(1.0, abs(total) / (_SATURATION_VALENCE * len(matched)))
        polarity = POSITIVE if total > 0 else NEGATIVE
        return SentenceScore(polarity=polarity, score=strength, intent=intent)


class RuleIntentScorer:
    """Binary feature-request detector over a fixed pattern list."""

    _PATTERNS = tuple(
        re.compile(p, re.IGNORECASE)
        for p in (
            r"\bplease\b",
            r"\b(?:add|include|implement|introduce|support|enable|allow|provide|bring back|restore)\b",
            r"\bwould (?:be (?:nice|great|good|awesome|helpful)|love|like)\b",
            r"\b(?:wish|hope|want|need|request|suggest|recommend)\b",
            r"\b(?:can|could|will) you\b",
            r"\bshould (?:have|be able|let|support|allow|add)\b",
            r"\b(?:missing|lacks|lacking)\b",
            r"\bfeature request\b",
            r"\bif only\b",
            r"\bit would\b",
            r"\boption to\b",
            r"\bability to\b",
        )
    )

    def score(self, sentence: str) -> float:
        return 1.0 if any(p.search(sentence) for p in self._PATTERNS) else 0.0


@dataclass(frozen=True)
class FeedbackProperties:
    """Message-level negativity, positivity, and intention, each in [0, 1]."""

    negativity: float
    positivity: float
    intention: float
    n_sentences: int = 0
    n_negative: int = 0
    n_positive: int = 0

    def __post_init__(self):
        if self.n_negative + self.n_positive > self.n_sentences:
            raise ValueError("polarity counts exceed the sentence count")

    @property
    def total(self) -> float:
        return self.negativity + self.positivity + self.intention


def score_message(message: FeedbackMessage, scorer: SentenceScorer) -> list[SentenceScore]:
    """Score each sentence, substituting a neutral score when the scorer fails."""
    scores: list[SentenceScore] = []
    for index, sentence in enumerate(split_sentences(message.text)):
        try:
            scores.append(scorer.score_sentence(sentence))
        except Exception:
            logger.warning(
                "scorer failed on message %s sentence %d; using neutral", message.id, index
            )
            scores.append(NEUTRAL_SCORE)
    return scores


def aggregate_properties(scores: Sequence[SentenceScore]) -> FeedbackProperties:
    """Fold sentence scores into message properties.

    Negativity averages strengths over negative sentences only, positivity over
    positive ones only; either is 0 when no sentence has that polarity.
    Intention averages over all sentences. An empty message is all zeros.
    """
    if not scores:
        return FeedbackProperties(0.0, 0.0, 0.0)
    neg = [s.score for s in scores if s.polarity == NEGATIVE]
    pos = [s.score for s in scores if s.polarity == POSITIVE]
    return FeedbackProperties(
        negativity=sum(neg) / len(neg) if neg else 0.0,
        positivity=sum(pos) / len(pos) if pos else 0.0,
        intention=sum(s.intent for s in scores) / len(scores),
        n_sentences=len(scores),
        n_negative=len(neg),
        n_positive=len(pos),
    )


def load_score_file(path: str | Path) -> dict[str, dict[int, SentenceScore]]:
    """Read external sentence scores: ``message_id,sentence_index,polarity,score,intent``."""
    path = Path(path)
    overrides: dict[str, dict[int, SentenceScore]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        for i, row in enumerate(csv.DictReader(fh), start=2):
            try:
                mid = row["message_id"].strip()
                index = int(row["sentence_index"])
                score = SentenceScore(
                    polarity=row["polarity"].strip(),
                    score=float(row["score"]),
                    intent=float(row["intent"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path} row {i}: {exc}") from exc
            if index < 0:
                raise ParseError(f"{path} row {i}: negative sentence index")
            overrides.setdefault(mid, {})[index] = score
    return overrides


def extract_properties(
    messages: Iterable[FeedbackMessage],
    scorer: SentenceScorer | None = None,
    overrides: Mapping[str, Mapping[int, SentenceScore]] | None = None,
) -> dict[str, FeedbackProperties]:
    """Message id -> properties, applying any per-sentence overrides row by row."""
    scorer = scorer or LexiconSentimentScorer()
    out: dict[str, FeedbackProperties] = {}
    for message in messages:
        scores = score_message(message, scorer)
        if overrides and message.id in overrides:
            for index, score in overrides[message.id].items():
                if index < len(scores):
                    scores[index] = score
                else:
                    logger.warning(
                        "override for message %s sentence %d ignored: only %d sentences",
                        message.id,
                        index,
                        len(scores),
                    )
        out[message.id] = aggregate_properties(scores)
    return out
