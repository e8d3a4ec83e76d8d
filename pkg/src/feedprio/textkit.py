"""Text normalization, TF-IDF vectors, and the similarity functions.

Everything here is a pure function over immutable inputs, so callers may
parallelize freely. TF-IDF uses raw term counts weighted by ln(N/df); terms
that occur in every document get weight 0 and are dropped from the vectors.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

TokenSeq = tuple[str, ...]

# Words with an optional internal apostrophe ("don't" stays one token).
_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")

# One-pass suffix rules: at most one rule fires per token per call.
# Deliberately naive; off by default.
_STEM_RULES = (
    ("sses", "ss"),
    ("ies", "y"),
    ("xes", "x"),
    ("zes", "z"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("ing", ""),
    ("ed", ""),
    ("s", ""),
)


def _load_wordlist(path: Path | None, default_resource: str) -> frozenset[str]:
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
    else:
        text = resources.files("feedprio.data").joinpath(default_resource).read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_stopwords(path: Path | None = None) -> frozenset[str]:
    """Load the shipped English stopword list, or an override file (one token per line)."""
    return _load_wordlist(path, "stopwords.txt")


_DEFAULT_STOPWORDS = load_stopwords()


def _stem(token: str) -> str:
    for suffix, repl in _STEM_RULES:
        if token.endswith(suffix) and len(token) - len(suffix) + len(repl) >= 3:
            stemmed = token[: -len(suffix)] + repl
            if suffix == "s" and token.endswith(("ss", "us")):
                return token
            return stemmed
    return token


def normalize(text: str, stopwords: frozenset[str] | None = None, stem: bool = False) -> TokenSeq:
    """Lowercase, strip punctuation, and drop stopwords; deterministic.

    Returns a tuple of word tokens. Empty input or punctuation-only input
    yields an empty tuple.
    """
    if stopwords is None:
        stopwords = _DEFAULT_STOPWORDS
    tokens = _TOKEN_RE.findall(text.lower())
    kept = [t for t in tokens if t not in stopwords]
    if stem:
        kept = [_stem(t) for t in kept]
    return tuple(kept)


@dataclass(frozen=True)
class SparseVector:
    """Sparse non-negative vector over a shared vocabulary; zero entries are omitted."""

    entries: dict[int, float] = field(default_factory=dict)

    def dot(self, other: "SparseVector") -> float:
        small, large = self.entries, other.entries
        if len(small) > len(large):
            small, large = large, small
        return sum(w * large[i] for i, w in small.items() if i in large)

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.entries.values()))


def tfidf(corpus: Sequence[TokenSeq]) -> tuple[dict[str, int], list[SparseVector]]:
    """Vectorize a corpus: weight(t, d) = tf(t, d) * ln(N / df(t)).

    Returns the vocabulary (token -> index, in first-seen order) and one
    sparse vector per document. N is the corpus size, so terms appearing in
    every document weight 0 and never appear in the vectors.
    """
    if not corpus:
        raise ValueError("tfidf requires a non-empty corpus")
    vocabulary: dict[str, int] = {}
    for doc in corpus:
        for token in doc:
            if token not in vocabulary:
                vocabulary[token] = len(vocabulary)
    df = Counter()
    for doc in corpus:
        df.update(set(doc))
    n_docs = len(corpus)
    idf = {t: math.log(n_docs / df[t]) for t in vocabulary}
    vectors = []
    for doc in corpus:
        counts = Counter(doc)
        entries = {
            vocabulary[t]: c * idf[t] for t, c in counts.items() if idf[t] > 0.0
        }
        vectors.append(SparseVector(entries))
    return vocabulary, vectors


def count_vectors(corpus: Sequence[TokenSeq]) -> tuple[dict[str, int], list[SparseVector]]:
    """Raw term-count vectors over a shared vocabulary (config alternative to TF-IDF)."""
    if not corpus:
        raise ValueError("count_vectors requires a non-empty corpus")
    vocabulary: dict[str, int] = {}
    for doc in corpus:
        for token in doc:
            if token not in vocabulary:
                vocabulary[token] = len(vocabulary)
    vectors = [
        SparseVector({vocabulary[t]: float(c) for t, c in Counter(doc).items()})
        for doc in corpus
    ]
    return vocabulary, vectors


def cosine(u: SparseVector, v: SparseVector) -> float:
    """Cosine similarity in [0, 1] for non-negative vectors; 0 when either norm is 0."""
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return u.dot(v) / (nu * nv)


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Set-overlap similarity |a n b| / |a u b|; 0 when both sides are empty."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)
