"""Prompted discovery of directed "requires" pairs, and dependency values.

One prompt template serves two modes: the whole requirement set at once, or
one topic cluster at a time. Cluster prompts cannot see across cluster
boundaries, so their results supplement rather than replace the whole-set
run; the combined set is the deduplicated union.

Dependency values summarize how often each requirement is required by others,
normalized so the raw values sum to 1. Four monotone transforms of the raw
value are provided for weighting experiments.
"""

from __future__ import annotations

import csv
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigurationError, DataError
from .evaluation import f_beta

logger = logging.getLogger(__name__)

PROMPT_TEMPLATE = (
    'A "requires" relation between two requirements (req_x and req_y) is defined as: '
    "req x requires req y for the purpose of software release, but not vice versa. "
    'Identify and output all the "requires" pairs from the requirements provided below, '
    "using the format: req_x --> req_y.\n"
    "{requirements}"
)

# One pair per line, tolerating list markers and arrow spelling drift.
_PAIR_LINE = re.compile(
    r"^\s*(?:[-*•]\s*|\d+[.)]\s*)?(\S+?)\s*(?:-->|->|→)\s*(\S+?)[\s.,;]*$"
)

BASELINE = "baseline"
COMBINED = "combined"
GOLD = "gold"


@dataclass(frozen=True)
class RequiresPair:
    """Directed dependency: ``from_id`` requires ``to_id``."""

    from_id: str
    to_id: str

    def __post_init__(self):
        if self.from_id == self.to_id:
            raise DataError(f"self-dependency {self.from_id!r} is not a valid pair")


@dataclass(frozen=True)
class RequiresSet:
    """Deduplicated directed pairs with a provenance tag (baseline, cluster_i, ...)."""

    tag: str
    pairs: tuple[RequiresPair, ...]

    def __post_init__(self):
        if len(set(self.pairs)) != len(self.pairs):
            raise DataError(f"{self.tag}: duplicate pairs")

    def __len__(self) -> int:
        return len(self.pairs)

    def as_set(self) -> frozenset[tuple[str, str]]:
        return frozenset((p.from_id, p.to_id) for p in self.pairs)

    def symmetric_pairs(self) -> list[tuple[str, str]]:
        """Unordered id pairs present in both directions (the two-way case)."""
        directed = self.as_set()
        return sorted(
            {tuple(sorted((a, b))) for a, b in directed if (b, a) in directed}
        )


def build_prompt(requirements: Sequence[tuple[str, str]]) -> str:
    """Fill the prompt template with ``id: text`` lines, one per requirement."""
    if not requirements:
        raise DataError("cannot build a prompt for zero requirements")
    lines = "\n".join(f"{rid}: {text}" for rid, text in requirements)
    return PROMPT_TEMPLATE.format(requirements=lines)


def parse_requires(response: str, valid_ids: Iterable[str], tag: str) -> RequiresSet:
    """Extract directed pairs from a model response.

    Unknown ids and self-loops are dropped with warnings; duplicates collapse.
    A non-empty response yielding nothing parsable gets a parse-quality warning.
    """
    known = set(valid_ids)
    pairs: list[RequiresPair] = []
    seen: set[tuple[str, str]] = set()
    parsed_any = False
    for line in response.splitlines():
        match = _PAIR_LINE.match(line)
        if not match:
            continue
        parsed_any = True
        from_id, to_id = match.group(1), match.group(2)
        if from_id == to_id:
            logger.warning("%s: dropping self-loop %s --> %s", tag, from_id, to_id)
            continue
        if from_id not in known or to_id not in known:
            logger.warning("%s: dropping pair with unknown id: %s --> %s", tag, from_id, to_id)
            continue
        if (from_id, to_id) in seen:
            continue
        seen.add((from_id, to_id))
        pairs.append(RequiresPair(from_id=from_id, to_id=to_id))
    if not parsed_any and response.strip():
        logger.warning("%s: response had no parsable pair lines; treating as empty", tag)
    return RequiresSet(tag=tag, pairs=tuple(pairs))


def union_pairs(sources: Sequence[RequiresSet], tag: str) -> RequiresSet:
    """Deduplicated union of several pair sets, first occurrence kept."""
    pairs: list[RequiresPair] = []
    seen: set[tuple[str, str]] = set()
    for source in sources:
        for pair in source.pairs:
            key = (pair.from_id, pair.to_id)
            if key not in seen:
                seen.add(key)
                pairs.append(pair)
    return RequiresSet(tag=tag, pairs=tuple(pairs))


def aggregate(baseline: RequiresSet, clusters: Sequence[RequiresSet]) -> RequiresSet:
    """Union of the whole-set run and all cluster runs, first occurrence kept."""
    combined = union_pairs((baseline, *clusters), COMBINED)
    two_way = combined.symmetric_pairs()
    if two_way:
        logger.warning("combined set keeps %d two-way dependency pair(s): %s", len(two_way), two_way)
    return combined


@dataclass(frozen=True)
class PairMetrics:
    n_predicted: int
    n_gold: int
    true_positives: int
    recall: float
    precision: float
    f1: float
    f2: float


def evaluate_pairs(predicted: RequiresSet, gold: RequiresSet) -> PairMetrics:
    """Exact directed-pair matching against the gold set."""
    if not gold.pairs:
        raise DataError("gold pair set is empty")
    hits = len(predicted.as_set() & gold.as_set())
    recall = hits / len(gold)
    precision = hits / len(predicted) if len(predicted) else 0.0
    return PairMetrics(
        n_predicted=len(predicted),
        n_gold=len(gold),
        true_positives=hits,
        recall=recall,
        precision=precision,
        f1=f_beta(recall, precision, 1.0),
        f2=f_beta(recall, precision, 2.0),
    )


DVALUE_VARIANTS = ("raw", "log", "inverse", "power", "zscore")


@dataclass(frozen=True)
class DValueVector:
    """Per-requirement dependency weight under one transform."""

    variant: str
    values: Mapping[str, float]

    def as_list(self, ids: Sequence[str]) -> list[float]:
        return [self.values[rid] for rid in ids]


def dvalue(pairs: RequiresSet, requirement_ids: Sequence[str]) -> DValueVector:
    """Raw dependency values: right-hand-side counts over the total pair count.

    An empty pair set yields an all-zero vector with a warning.
    """
    counts = {rid: 0 for rid in requirement_ids}
    for pair in pairs.pairs:
        if pair.to_id in counts:
            counts[pair.to_id] += 1
    total = len(pairs)
    if total == 0:
        logger.warning("dvalue: empty pair set; all dependency values are 0")
        return DValueVector(variant="raw", values={rid: 0.0 for rid in requirement_ids})
    return DValueVector(variant="raw", values={rid: c / total for rid, c in counts.items()})


def dvalue_variant(raw: DValueVector, variant: str) -> DValueVector:
    """Transform a raw vector: log, inverse, power, or shifted zscore."""
    if raw.variant != "raw":
        raise ConfigurationError(f"variants derive from the raw vector, got {raw.variant!r}")
    if variant == "raw":
        return raw
    values = dict(raw.values)
    if variant == "log":
        out = {rid: math.log(1.0 + v) for rid, v in values.items()}
    elif variant == "inverse":
        out = {rid: 1.0 - v for rid, v in values.items()}
    elif variant == "power":
        out = {rid: math.sqrt(v) for rid, v in values.items()}
    elif variant == "zscore":
        data = list(values.values())
        mean = sum(data) / len(data)
        variance = sum((v - mean) ** 2 for v in data) / len(data)
        if variance == 0:
            logger.warning("dvalue: zero variance; zscore variant collapses to all zeros")
            out = {rid: 0.0 for rid in values}
        else:
            std = math.sqrt(variance)
            z = {rid: (v - mean) / std for rid, v in values.items()}
            shift = abs(min(z.values()))
            out = {rid: zv + shift for rid, zv in z.items()}
    else:
        raise ConfigurationError(f"unknown dependency-value variant {variant!r}")
    return DValueVector(variant=variant, values=out)


def write_pairs_csv(path: str | Path, pairs: RequiresSet) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["from_id", "to_id"])
        for pair in pairs.pairs:
            writer.writerow([pair.from_id, pair.to_id])


def read_pairs_csv(path: str | Path, tag: str) -> RequiresSet:
    pairs: list[RequiresPair] = []
    seen: set[tuple[str, str]] = set()
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["from_id"].strip(), row["to_id"].strip())
            if key in seen:
                continue
            seen.add(key)
            pairs.append(RequiresPair(from_id=key[0], to_id=key[1]))
    return RequiresSet(tag=tag, pairs=tuple(pairs))
