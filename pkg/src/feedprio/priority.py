"""Feedback-driven priority scores for requirements.

Three scoring rules share one shape: sum similarity-weighted sentiment and
intent over a set of feedback messages, then divide by the size of that set.
They differ in which messages count.

* direct: only messages associated with the requirement itself
* cluster: the union of messages associated with any requirement in the
  requirement's topic cluster, so related requirements share evidence
* coherent cluster: the cluster rule damped by how similar the cluster's
  requirements actually are, guarding against mixed clusters

A requirement (or cluster) with no associated messages scores exactly 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import DataError, IntegrityError
from .feedback import FeedbackProperties
from .textkit import SparseVector, TokenSeq, cosine, count_vectors, tfidf
from .topics import FALLBACK_CLUSTER

import numpy as np

ASSOCIATION_THRESHOLD = 0.1

SimTable = Mapping[str, Mapping[str, float]]


def build_vectors(
    requirement_docs: Mapping[str, TokenSeq],
    message_docs: Mapping[str, TokenSeq],
    vectorizer: str = "tfidf",
) -> tuple[dict[str, SparseVector], dict[str, SparseVector]]:
    """Vectors for requirements and messages in one shared space.

    The transform is fit on the concatenation of both corpora so cosine
    similarities are comparable across the two sides. ``vectorizer`` picks
    TF-IDF weighting (default) or raw counts.
    """
    if vectorizer not in ("tfidf", "counts"):
        raise DataError(f"unknown vectorizer {vectorizer!r}")
    req_ids = list(requirement_docs)
    msg_ids = list(message_docs)
    corpus = [requirement_docs[r] for r in req_ids] + [message_docs[m] for m in msg_ids]
    transform = tfidf if vectorizer == "tfidf" else count_vectors
    _, vectors = transform(corpus)
    req_vecs = dict(zip(req_ids, vectors[: len(req_ids)]))
    msg_vecs = dict(zip(msg_ids, vectors[len(req_ids) :]))
    return req_vecs, msg_vecs


def similarity_table(
    requirement_vectors: Mapping[str, SparseVector], message_vectors: Mapping[str, SparseVector]
) -> dict[str, dict[str, float]]:
    """Cosine similarity of every requirement against every message."""
    return {
        rid: {mid: cosine(rv, mv) for mid, mv in message_vectors.items()}
        for rid, rv in requirement_vectors.items()
    }


def embedding_similarity_table(
    requirement_vectors: Mapping[str, np.ndarray], message_vectors: Mapping[str, np.ndarray]
) -> dict[str, dict[str, float]]:
    """Cosine over dense embeddings, clamped at 0 so scores stay non-negative."""
    def unit(v: np.ndarray) -> np.ndarray:
        norm = np.linalg.norm(v)
        return v / norm if norm > 0 else v

    req_unit = {rid: unit(np.asarray(v, dtype=float)) for rid, v in requirement_vectors.items()}
    msg_unit = {mid: unit(np.asarray(v, dtype=float)) for mid, v in message_vectors.items()}
    return {
        rid: {mid: max(0.0, float(rv @ mv)) for mid, mv in msg_unit.items()}
        for rid, rv in req_unit.items()
    }


@dataclass(frozen=True)
class AssociationMap:
    """Messages associated with each requirement (similarity strictly above threshold)."""

    threshold: float
    members: Mapping[str, tuple[str, ...]]

    def __getitem__(self, requirement_id: str) -> tuple[str, ...]:
        return self.members[requirement_id]


def associate(sims: SimTable, threshold: float = ASSOCIATION_THRESHOLD) -> AssociationMap:
    """Keep, per requirement, the messages whose similarity exceeds the threshold.

    The comparison is strict; a similarity exactly at the threshold is dropped.
    """
    members = {
        rid: tuple(mid for mid in sorted(row) if row[mid] > threshold)
        for rid, row in sims.items()
    }
    return AssociationMap(threshold=threshold, members=members)


@dataclass(frozen=True)
class ClusterAssociationMap:
    """Per cluster, the deduplicated union of its members' associated messages.

    Requirements in the out-of-vocabulary fallback cluster are not pooled with
    each other (they share no topic, only the lack of one); each keeps its own
    association list.
    """

    threshold: float
    members: Mapping[int, tuple[str, ...]]
    cluster_of: Mapping[str, int]
    unpooled: Mapping[str, tuple[str, ...]]

    def messages_for(self, requirement_id: str) -> tuple[str, ...]:
        if requirement_id in self.unpooled:
            return self.unpooled[requirement_id]
        return self.members[self.cluster_of[requirement_id]]


def cluster_associate(
    clusters: Mapping[int, Sequence[str]], associations: AssociationMap
) -> ClusterAssociationMap:
    """Union the associated messages of each cluster's requirements."""
    union: dict[int, tuple[str, ...]] = {}
    cluster_of: dict[str, int] = {}
    unpooled: dict[str, tuple[str, ...]] = {}
    for cluster_id, requirement_ids in clusters.items():
        pooled: set[str] = set()
        for rid in requirement_ids:
            if rid not in associations.members:
                raise IntegrityError(f"cluster {cluster_id} references unassociated requirement {rid!r}")
            if rid in cluster_of:
                raise IntegrityError(f"requirement {rid!r} appears in more than one cluster")
            cluster_of[rid] = cluster_id
            if cluster_id == FALLBACK_CLUSTER:
                unpooled[rid] = associations[rid]
            else:
                pooled.update(associations[rid])
        union[cluster_id] = tuple(sorted(pooled))
    return ClusterAssociationMap(
        threshold=associations.threshold, members=union, cluster_of=cluster_of, unpooled=unpooled
    )


def cluster_coherence(
    clusters: Mapping[int, Sequence[str]], requirement_vectors: Mapping[str, SparseVector]
) -> dict[int, float]:
    """Mean pairwise similarity of each cluster's requirements, capped at 1.

    Singleton (and empty) clusters are fully coherent by convention. Means are
    clamped into [0, 1] so the damping factor never inflates or flips a score.
    """
    out: dict[int, float] = {}
    for cluster_id, requirement_ids in clusters.items():
        ids = list(requirement_ids)
        if cluster_id == FALLBACK_CLUSTER or len(ids) < 2:
            out[cluster_id] = 1.0
            continue
        sims = [
            cosine(requirement_vectors[a], requirement_vectors[b])
            for i, a in enumerate(ids)
            for b in ids[i + 1 :]
        ]
        out[cluster_id] = min(1.0, max(0.0, sum(sims) / len(sims)))
    return out


def embedding_cluster_coherence(
    clusters: Mapping[int, Sequence[str]], requirement_vectors: Mapping[str, np.ndarray]
) -> dict[int, float]:
    """Coherence over dense embeddings; same conventions as the sparse variant."""
    out: dict[int, float] = {}
    for cluster_id, requirement_ids in clusters.items():
        ids = list(requirement_ids)
        if cluster_id == FALLBACK_CLUSTER or len(ids) < 2:
            out[cluster_id] = 1.0
            continue
        unit = []
        for rid in ids:
            v = np.asarray(requirement_vectors[rid], dtype=float)
            norm = np.linalg.norm(v)
            unit.append(v / norm if norm > 0 else v)
        sims = [float(unit[i] @ unit[j]) for i in range(len(ids)) for j in range(i + 1, len(ids))]
        out[cluster_id] = min(1.0, max(0.0, sum(sims) / len(sims)))
    return out


def _property_total(properties: Mapping[str, FeedbackProperties], message_id: str) -> float:
    try:
        return properties[message_id].total
    except KeyError:
        raise DataError(f"no feedback properties for message {message_id!r}") from None


def score_direct(
    associations: AssociationMap, sims: SimTable, properties: Mapping[str, FeedbackProperties]
) -> dict[str, float]:
    """Priority from a requirement's own associated messages.

    score(r) = sum over m in F(r) of sim(r, m) * (neg + pos + intent) / |F(r)|,
    and 0 when F(r) is empty.
    """
    scores: dict[str, float] = {}
    for rid, message_ids in associations.members.items():
        if not message_ids:
            scores[rid] = 0.0
            continue
        total = sum(sims[rid][mid] * _property_total(properties, mid) for mid in message_ids)
        scores[rid] = total / len(message_ids)
    return scores


def score_cluster(
    cluster_assoc: ClusterAssociationMap,
    sims: SimTable,
    properties: Mapping[str, FeedbackProperties],
) -> dict[str, float]:
    """Priority from the requirement's whole cluster of associated messages.

    Every message in the cluster union contributes, weighted by its similarity
    to this requirement itself, below-threshold similarities included.
    """
    scores: dict[str, float] = {}
    for rid in cluster_assoc.cluster_of:
        message_ids = cluster_assoc.messages_for(rid)
        if not message_ids:
            scores[rid] = 0.0
            continue
        total = sum(sims[rid][mid] * _property_total(properties, mid) for mid in message_ids)
        scores[rid] = total / len(message_ids)
    return scores


def score_cluster_coherent(
    cluster_assoc: ClusterAssociationMap,
    sims: SimTable,
    properties: Mapping[str, FeedbackProperties],
    coherence: Mapping[int, float],
) -> dict[str, float]:
    """Cluster priority damped by the cluster's internal coherence."""
    base = score_cluster(cluster_assoc, sims, properties)
    return {
        rid: coherence[cluster_assoc.cluster_of[rid]] * score
        for rid, score in base.items()
    }


@dataclass(frozen=True)
class PriorityTable:
    """Scores of one method over one instance, with a deterministic ranking."""

    method: str
    scores: Mapping[str, float]

    def ranking(self) -> list[str]:
        """Requirement ids from highest score down; ties break by ascending id."""
        return sorted(self.scores, key=lambda rid: (-self.scores[rid], rid))

    def top(self, k: int) -> list[str]:
        return self.ranking()[:k]


def write_priority_csv(path: str | Path, tables: Sequence[PriorityTable]) -> None:
    """Emit ``requirement_id,method,score,rank`` rows, one block per method."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["requirement_id", "method", "score", "rank"])
        for table in tables:
            for rank, rid in enumerate(table.ranking(), start=1):
                writer.writerow([rid, table.method, repr(table.scores[rid]), rank])


def read_priority_csv(path: str | Path) -> dict[str, PriorityTable]:
    """Inverse of :func:`write_priority_csv`, keyed by method name."""
    scores: dict[str, dict[str, float]] = {}
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            scores.setdefault(row["method"], {})[row["requirement_id"]] = float(row["score"])
    return {method: PriorityTable(method=method, scores=table) for method, table in scores.items()}
