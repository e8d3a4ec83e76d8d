"""Ranking evaluation against ground truth, and paired significance tests.

A ranking over n pooled requirements is cut at five sizes centered on the
true set's size k (k itself and 10/20 percent of n either side), then scored
with recall, precision, F1, and F2 at each cutoff. Method comparisons use the
Wilcoxon signed-rank test paired over instances, exact for small samples, and
Fisher's method to combine the per-variant p-values.

No external stats dependency: the exact Wilcoxon null is enumerated by
dynamic programming and the chi-square survival function used by Fisher's
method has a closed form for even degrees of freedom.
"""

from __future__ import annotations

import csv
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

logger = logging.getLogger(__name__)

CUTOFF_LABELS = ("k-20", "k-10", "k", "k+10", "k+20")

# Largest sample for which the exact Wilcoxon null distribution is enumerated.
EXACT_WILCOXON_LIMIT = 25


def _round_half_away(x: float) -> int:
    if x >= 0:
        return int(math.floor(x + 0.5))
    return int(math.ceil(x - 0.5))


def cutoffs(k: int, n: int) -> dict[str, int]:
    """Five cutoff sizes around k, stepped by 10 percent of n, clamped to [1, n]."""
    if not 0 < k <= n:
        raise ValueError(f"need 0 < k <= n, got k={k}, n={n}")
    steps = {"k-20": -0.2, "k-10": -0.1, "k": 0.0, "k+10": 0.1, "k+20": 0.2}
    return {
        label: min(n, max(1, _round_half_away(k + share * n)))
        for label, share in steps.items()
    }


def precision_recall(selected: Iterable[str], truth: frozenset[str] | set[str]) -> tuple[float, float]:
    """(recall, precision) of a selected set against the true set."""
    selected = list(selected)
    if not truth:
        raise ValueError("ground truth must be non-empty")
    hits = sum(1 for rid in selected if rid in truth)
    recall = hits / len(truth)
    precision = hits / len(selected) if selected else 0.0
    return recall, precision


def f_beta(recall: float, precision: float, beta: float) -> float:
    """F-measure; 0 when both inputs are 0."""
    denominator = beta * beta * precision + recall
    if denominator == 0:
        return 0.0
    return (1 + beta * beta) * precision * recall / denominator


@dataclass(frozen=True)
class MetricsRow:
    """Scores of one method at one cutoff of one instance."""

    instance: str
    method: str
    cutoff_label: str
    cutoff_size: int
    recall: float
    precision: float
    f1: float
    f2: float


def evaluate_ranking(
    instance: str,
    method: str,
    ranking: Sequence[str],
    truth: frozenset[str] | set[str],
) -> list[MetricsRow]:
    """Score one ranking at the five standard cutoffs."""
    sizes = cutoffs(len(truth), len(ranking))
    rows = []
    for label in CUTOFF_LABELS:
        size = sizes[label]
        recall, precision = precision_recall(ranking[:size], truth)
        rows.append(
            MetricsRow(
                instance=instance,
                method=method,
                cutoff_label=label,
                cutoff_size=size,
                recall=recall,
                precision=precision,
                f1=f_beta(recall, precision, 1.0),
                f2=f_beta(recall, precision, 2.0),
            )
        )
    return rows


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of ranks of positive differences
    n_nonzero: int
    p_value: float
    method: str  # "exact" | "normal" | "degenerate"

    @property
    def degenerate(self) -> bool:
        return self.method == "degenerate"


def _ranks_with_ties(values: Sequence[float]) -> tuple[list[float], list[int]]:
    """Average ranks of |values| plus tie-group sizes."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    tie_sizes: list[int] = []
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j) / 2 + 1
        for idx in order[i : j + 1]:
            ranks[idx] = average
        tie_sizes.append(j - i + 1)
        i = j + 1
    return ranks, tie_sizes


def _exact_two_sided(doubled_ranks: Sequence[int], doubled_statistic: int) -> float:
    """P(|W - mean| >= observed) under the signed-rank null, by subset-sum DP.

    Ranks arrive doubled so tied (half-integer) average ranks stay integral.
    """
    total = sum(doubled_ranks)
    counts = [0] * (total + 1)
    counts[0] = 1
    for d in doubled_ranks:
        for s in range(total, d - 1, -1):
            counts[s] += counts[s - d]
    threshold = abs(2 * doubled_statistic - total)  # doubled distance from the mean
    favorable = sum(c for s, c in enumerate(counts) if abs(2 * s - total) >= threshold)
    return favorable / (1 << len(doubled_ranks))


def wilcoxon_signed_rank(diffs: Sequence[float]) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test on paired differences.

    Zero differences are dropped. All-zero input is degenerate: p = 1. Samples
    up to EXACT_WILCOXON_LIMIT get the exact null; larger ones use the normal
    approximation with tie and continuity corrections.
    """
    nonzero = [d for d in diffs if d != 0]
    if not nonzero:
        logger.warning("wilcoxon: all %d differences are zero; test is degenerate", len(list(diffs)))
        return WilcoxonResult(statistic=0.0, n_nonzero=0, p_value=1.0, method="degenerate")
    magnitudes = [abs(d) for d in nonzero]
    ranks, tie_sizes = _ranks_with_ties(magnitudes)
    w_plus = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    m = len(nonzero)
    if m <= EXACT_WILCOXON_LIMIT:
        doubled = [int(round(2 * r)) for r in ranks]
        p = _exact_two_sided(doubled, int(round(2 * w_plus)))
        return WilcoxonResult(statistic=w_plus, n_nonzero=m, p_value=p, method="exact")
    mean = m * (m + 1) / 4
    variance = m * (m + 1) * (2 * m + 1) / 24 - sum(t**3 - t for t in tie_sizes) / 48
    if variance <= 0:
        return WilcoxonResult(statistic=w_plus, n_nonzero=m, p_value=1.0, method="degenerate")
    shift = w_plus - mean
    z = (shift - 0.5 * (1 if shift > 0 else -1 if shift < 0 else 0)) / math.sqrt(variance)
    p = min(1.0, math.erfc(abs(z) / math.sqrt(2)))
    return WilcoxonResult(statistic=w_plus, n_nonzero=m, p_value=p, method="normal")


@dataclass(frozen=True)
class FisherResult:
    statistic: float
    df: int
    p_value: float


def chi2_sf_even(x: float, df: int) -> float:
    """Chi-square survival function for even df, via the closed-form series."""
    if df <= 0 or df % 2 != 0:
        raise ValueError(f"df must be a positive even integer, got {df}")
    if x <= 0:
        return 1.0
    half = x / 2
    log_half = math.log(half)
    total = 0.0
    for j in range(df // 2):
        total += math.exp(-half + j * log_half - math.lgamma(j + 1))
    return min(1.0, total)


def fisher_combine(p_values: Sequence[float]) -> FisherResult:
    """Combine independent p-values: X = -2 * sum(ln p) against chi-square 2m.

    Zero p-values are clipped to the smallest positive float with a warning.
    """
    if not p_values:
        raise ValueError("cannot combine an empty p-value list")
    clipped = []
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
        if p == 0.0:
            logger.warning("fisher: clipping a zero p-value to the smallest positive float")
            p = sys.float_info.min
        clipped.append(p)
    statistic = -2.0 * sum(math.log(p) for p in clipped)
    df = 2 * len(clipped)
    return FisherResult(statistic=statistic, df=df, p_value=chi2_sf_even(statistic, df))


@dataclass(frozen=True)
class ComparisonRow:
    """Wilcoxon outcome for one variant against the baseline at one cell."""

    metric: str
    cutoff_label: str
    variant: str
    n_pairs: int
    statistic: float
    p_value: float
    degenerate: bool


@dataclass(frozen=True)
class CombinedRow:
    """Fisher combination over all variants at one (metric, cutoff) cell."""

    metric: str
    cutoff_label: str
    df: int
    statistic: float
    p_value: float


METRIC_NAMES = ("recall", "precision", "f1", "f2")


def compare_methods(
    rows: Sequence[MetricsRow], baseline: str
) -> tuple[list[ComparisonRow], list[CombinedRow]]:
    """Paired tests of every non-baseline method against the baseline.

    Pairs are instances; differences are variant minus baseline. The per-cell
    variant p-values are then combined across variants with Fisher's method.
    """
    by_cell: dict[tuple[str, str, str], dict[str, float]] = {}
    methods: list[str] = []
    for row in rows:
        if row.method not in methods:
            methods.append(row.method)
        for metric in METRIC_NAMES:
            by_cell.setdefault((metric, row.cutoff_label, row.method), {})[row.instance] = getattr(
                row, metric
            )
    if baseline not in methods:
        raise ValueError(f"baseline method {baseline!r} absent from metrics rows")
    variants = [m for m in methods if m != baseline]
    comparisons: list[ComparisonRow] = []
    combined: list[CombinedRow] = []
    labels = sorted({label for _, label, _ in by_cell}, key=CUTOFF_LABELS.index)
    for metric in METRIC_NAMES:
        for label in labels:
            cell_ps: list[float] = []
            for variant in variants:
                base_values = by_cell.get((metric, label, baseline), {})
                variant_values = by_cell.get((metric, label, variant), {})
                shared = sorted(base_values.keys() & variant_values.keys())
                diffs = [variant_values[i] - base_values[i] for i in shared]
                result = wilcoxon_signed_rank(diffs)
                comparisons.append(
                    ComparisonRow(
                        metric=metric,
                        cutoff_label=label,
                        variant=variant,
                        n_pairs=result.n_nonzero,
                        statistic=result.statistic,
                        p_value=result.p_value,
                        degenerate=result.degenerate,
                    )
                )
                cell_ps.append(result.p_value)
            if cell_ps:
                fisher = fisher_combine(cell_ps)
                combined.append(
                    CombinedRow(
                        metric=metric,
                        cutoff_label=label,
                        df=fisher.df,
                        statistic=fisher.statistic,
                        p_value=fisher.p_value,
                    )
                )
    return comparisons, combined


def write_metrics_csv(path: str | Path, rows: Sequence[MetricsRow]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["instance", "method", "cutoff_label", "cutoff_size", "recall", "precision", "f1", "f2"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.instance,
                    r.method,
                    r.cutoff_label,
                    r.cutoff_size,
                    repr(r.recall),
                    repr(r.precision),
                    repr(r.f1),
                    repr(r.f2),
                ]
            )


def read_metrics_csv(path: str | Path) -> list[MetricsRow]:
    rows = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                MetricsRow(
                    instance=row["instance"],
                    method=row["method"],
                    cutoff_label=row["cutoff_label"],
                    cutoff_size=int(row["cutoff_size"]),
                    recall=float(row["recall"]),
                    precision=float(row["precision"]),
                    f1=float(row["f1"]),
                    f2=float(row["f2"]),
                )
            )
    return rows


def write_stats_csv(
    path: str | Path, comparisons: Sequence[ComparisonRow], combined: Sequence[CombinedRow]
) -> None:
    """One row per (metric, cutoff, variant); the cell's combined p repeats per row."""
    fisher_by_cell = {(f.metric, f.cutoff_label): f.p_value for f in combined}
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["metric", "cutoff_label", "variant", "wilcoxon_p", "fisher_p"])
        for c in comparisons:
            fisher_p = fisher_by_cell.get((c.metric, c.cutoff_label))
            writer.writerow(
                [
                    c.metric,
                    c.cutoff_label,
                    c.variant,
                    repr(c.p_value),
                    "" if fisher_p is None else repr(fisher_p),
                ]
            )


def plot_data(rows: Sequence[MetricsRow]) -> dict[str, dict[str, dict[str, float]]]:
    """metric -> method -> cutoff label -> mean value across instances."""
    sums: dict[tuple[str, str, str], list[float]] = {}
    for row in rows:
        for metric in METRIC_NAMES:
            sums.setdefault((metric, row.method, row.cutoff_label), []).append(getattr(row, metric))
    out: dict[str, dict[str, dict[str, float]]] = {}
    for (metric, method, label), values in sums.items():
        out.setdefault(metric, {}).setdefault(method, {})[label] = sum(values) / len(values)
    return out
