"""Topic models for grouping requirements into clusters.

The default model is latent Dirichlet allocation fit by collapsed Gibbs
sampling on the review corpus, then folded in over requirement texts with a
deterministic EM pass so that a saved model assigns the same topics on every
machine. An embedding-based alternative (spherical k-means over precomputed
vectors) covers corpora where bag-of-words topics are too coarse.

Requirements whose tokens are all out of vocabulary cannot be placed and land
in a fallback cluster with id -1.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, DataError, ParseError
from .textkit import TokenSeq

logger = logging.getLogger(__name__)

FALLBACK_CLUSTER = -1

DEFAULT_TOPICS = 20
DEFAULT_PASSES = 15
DEFAULT_BETA = 0.01
FOLD_IN_ITERATIONS = 50


@dataclass(frozen=True)
class TopicModel:
    """A fitted LDA model: vocabulary plus per-topic word distributions."""

    vocabulary: dict[str, int]
    phi: np.ndarray  # shape (n_topics, vocabulary size)
    alpha: float
    beta: float
    seed: int
    passes: int
    perplexity_per_pass: tuple[float, ...] = field(default=())

    @property
    def n_topics(self) -> int:
        return int(self.phi.shape[0])

    def encode(self, doc: TokenSeq) -> list[int]:
        """Vocabulary indices of the in-vocabulary tokens of a document."""
        return [self.vocabulary[t] for t in doc if t in self.vocabulary]


def _conditional(
    n_dk: np.ndarray, n_kt: np.ndarray, n_k: np.ndarray, term: int, alpha: float, beta: float, v: int
) -> np.ndarray:
    return (n_dk + alpha) * (n_kt[:, term] + beta) / (n_k + v * beta)


def _perplexity(
    docs: Sequence[list[int]], n_dk: np.ndarray, n_kt: np.ndarray, n_k: np.ndarray,
    alpha: float, beta: float,
) -> float:
    v = n_kt.shape[1]
    phi = (n_kt + beta) / (n_k + v * beta)[:, None]
    log_likelihood = 0.0
    n_tokens = 0
    for d, doc in enumerate(docs):
        if not doc:
            continue
        theta = (n_dk[d] + alpha) / (len(doc) + n_dk.shape[1] * alpha)
        word_probs = theta @ phi[:, doc]
        log_likelihood += float(np.log(word_probs).sum())
        n_tokens += len(doc)
    if n_tokens == 0:
        return float("inf")
    return math.exp(-log_likelihood / n_tokens)


def fit_lda(
    corpus: Sequence[TokenSeq],
    n_topics: int = DEFAULT_TOPICS,
    passes: int = DEFAULT_PASSES,
    alpha: float | None = None,
    beta: float = DEFAULT_BETA,
    seed: int = 0,
) -> TopicModel:
    """Fit LDA by collapsed Gibbs sampling; reruns with one seed are bit-identical.

    ``alpha`` defaults to 50 / n_topics (symmetric); ``beta`` is symmetric too.
    Perplexity is recorded after every pass.
    """
    if n_topics < 1:
        raise ConfigurationError(f"n_topics must be positive, got {n_topics}")
    if passes < 1:
        raise ConfigurationError(f"passes must be positive, got {passes}")
    if alpha is None:
        alpha = 50.0 / n_topics
    vocabulary: dict[str, int] = {}
    for doc in corpus:
        for token in doc:
            vocabulary.setdefault(token, len(vocabulary))
    v = len(vocabulary)
    if v == 0:
        raise ConfigurationError("cannot fit a topic model: corpus has no tokens")
    docs = [[vocabulary[t] for t in doc] for doc in corpus]

    rng = np.random.default_rng(np.random.PCG64(seed))
    n_dk = np.zeros((len(docs), n_topics))
    n_kt = np.zeros((n_topics, v))
    n_k = np.zeros(n_topics)
    assignments: list[np.ndarray] = []
    for d, doc in enumerate(docs):
        z = rng.integers(n_topics, size=len(doc))
        assignments.append(z)
        for term, k in zip(doc, z):
            n_dk[d, k] += 1
            n_kt[k, term] += 1
            n_k[k] += 1

    perplexities: list[float] = []
    for _ in range(passes):
        for d, doc in enumerate(docs):
            z = assignments[d]
            for i, term in enumerate(doc):
                k = z[i]
                n_dk[d, k] -= 1
                n_kt[k, term] -= 1
                n_k[k] -= 1
                weights = _conditional(n_dk[d], n_kt, n_k, term, alpha, beta, v)
                cumulative = np.cumsum(weights)
                k = int(np.searchsorted(cumulative, rng.random() * cumulative[-1]))
                z[i] = k
                n_dk[d, k] += 1
                n_kt[k, term] += 1
                n_k[k] += 1
        perplexities.append(_perplexity(docs, n_dk, n_kt, n_k, alpha, beta))

    phi = (n_kt + beta) / (n_k + v * beta)[:, None]
    return TopicModel(
        vocabulary=vocabulary,
        phi=phi,
        alpha=alpha,
        beta=beta,
        seed=seed,
        passes=passes,
        perplexity_per_pass=tuple(perplexities),
    )


def infer_theta(model: TopicModel, doc: TokenSeq, iterations: int = FOLD_IN_ITERATIONS) -> np.ndarray | None:
    """Topic mixture of an unseen document via deterministic EM fold-in.

    Out-of-vocabulary tokens are dropped; an all-OOV document yields None.
    """
    terms = model.encode(doc)
    if not terms:
        return None
    k = model.n_topics
    phi_doc = model.phi[:, terms]  # (K, n_terms)
    theta = np.full(k, 1.0 / k)
    for _ in range(iterations):
        responsibility = theta[:, None] * phi_doc
        responsibility /= responsibility.sum(axis=0, keepdims=True)
        theta = (responsibility.sum(axis=1) + model.alpha) / (len(terms) + k * model.alpha)
    return theta


def assign_topics(
    model: TopicModel, docs: Sequence[TokenSeq], iterations: int = FOLD_IN_ITERATIONS
) -> list[int]:
    """Dominant topic per document; FALLBACK_CLUSTER when nothing is in vocabulary.

    Ties resolve to the lowest topic index.
    """
    out: list[int] = []
    for doc in docs:
        theta = infer_theta(model, doc, iterations)
        out.append(FALLBACK_CLUSTER if theta is None else int(np.argmax(theta)))
    return out


def cluster_requirements(ids: Sequence[str], assignments: Sequence[int]) -> dict[int, tuple[str, ...]]:
    """Group requirement ids by assigned topic, keeping input order inside groups."""
    if len(ids) != len(assignments):
        raise DataError(f"{len(ids)} ids but {len(assignments)} topic assignments")
    clusters: dict[int, list[str]] = {}
    for rid, topic in zip(ids, assignments):
        clusters.setdefault(topic, []).append(rid)
    if FALLBACK_CLUSTER in clusters:
        logger.warning(
            "%d requirement(s) had no in-vocabulary tokens; placed in fallback cluster",
            len(clusters[FALLBACK_CLUSTER]),
        )
    return {topic: tuple(members) for topic, members in sorted(clusters.items())}


def save_model(model: TopicModel, path: str | Path) -> None:
    """Persist a model as JSON with distributions at 10 decimal places."""
    payload = {
        "n_topics": model.n_topics,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "passes": model.passes,
        "perplexity_per_pass": [round(p, 10) for p in model.perplexity_per_pass],
        "vocabulary": model.vocabulary,
        "phi": [[round(float(x), 10) for x in row] for row in model.phi],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TopicModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        model = TopicModel(
            vocabulary={str(k): int(i) for k, i in payload["vocabulary"].items()},
            phi=np.array(payload["phi"], dtype=float),
            alpha=float(payload["alpha"]),
            beta=float(payload["beta"]),
            seed=int(payload["seed"]),
            passes=int(payload["passes"]),
            perplexity_per_pass=tuple(float(p) for p in payload["perplexity_per_pass"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: not a saved topic model ({exc})") from exc
    if model.phi.ndim != 2 or model.phi.shape != (payload["n_topics"], len(model.vocabulary)):
        raise ParseError(f"{path}: distribution shape does not match vocabulary")
    return model


def load_embeddings(path: str | Path) -> dict[str, np.ndarray]:
    """Read precomputed text embeddings from CSV with header ``id,dim0..dimD``."""
    path = Path(path)
    out: dict[str, np.ndarray] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id" or len(header) < 2:
            raise ParseError(f"{path}: expected an `id,dim0..dimD` header")
        width = len(header) - 1
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width + 1:
                raise ParseError(f"{path} row {i}: expected {width} dimensions, got {len(row) - 1}")
            try:
                out[row[0].strip()] = np.asarray([float(v) for v in row[1:]], dtype=float)
            except ValueError as exc:
                raise ParseError(f"{path} row {i}: {exc}") from exc
    if not out:
        raise ParseError(f"{path}: no embedding rows")
    return out


def fit_kmeans(
    vectors: Sequence[np.ndarray], n_clusters: int, seed: int = 0, iterations: int = 100
) -> np.ndarray:
    """Spherical k-means centroids over unit-normalized vectors, seeded.

    Empty clusters keep their previous centroid.
    """
    if not vectors:
        raise DataError("cannot cluster an empty embedding set")
    matrix = np.stack([np.asarray(v, dtype=float) for v in vectors])
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    matrix = matrix / norms
    n_clusters = min(n_clusters, len(vectors))
    rng = np.random.default_rng(np.random.PCG64(seed))
    centroids = matrix[rng.choice(len(vectors), size=n_clusters, replace=False)].copy()
    for _ in range(iterations):
        labels = np.argmax(matrix @ centroids.T, axis=1)
        updated = centroids.copy()
        for c in range(n_clusters):
            members = matrix[labels == c]
            if len(members) == 0:
                continue
            centroid = members.mean(axis=0)
            norm = np.linalg.norm(centroid)
            if norm > 0:
                updated[c] = centroid / norm
        if np.allclose(updated, centroids):
            break
        centroids = updated
    return centroids


def assign_embedded(vectors: Mapping[str, np.ndarray], centroids: np.ndarray) -> dict[str, int]:
    """Nearest-centroid (max cosine) cluster per id; zero vectors fall back."""
    out: dict[str, int] = {}
    for key, vector in vectors.items():
        norm = np.linalg.norm(vector)
        if norm == 0:
            out[key] = FALLBACK_CLUSTER
            continue
        out[key] = int(np.argmax(centroids @ (vector / norm)))
    return out
