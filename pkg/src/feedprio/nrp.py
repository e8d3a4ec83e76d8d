"""Next-release selection with NSGA-II, plus an exhaustive oracle.

The problem: pick a subset of requirements maximizing the weighted sum of
stakeholder value scores while minimizing development cost, optionally also
maximizing a dependency-value objective so often-required requirements get
pulled into the release. Search is a standard generational NSGA-II (fast
non-dominated sorting, crowding distance, tournament of 5, single-point
crossover, per-bit mutation), seeded and bit-reproducible.

Benchmark comparisons score each algorithm by its share of a reference front
built by merging candidate fronts in (value, cost) space and keeping the
non-dominated remainder.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import BenchmarkTable
from .errors import ConfigurationError, DataError
from .mining import DValueVector, RequiresSet

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 20

BI = "bi"
TRI = "tri"


@dataclass(frozen=True)
class NrpProblem:
    """Value/cost data for one selection problem."""

    ids: tuple[str, ...]
    values: np.ndarray  # (n, n_stakeholders)
    costs: np.ndarray  # (n,) development estimates
    weights: np.ndarray  # (n_stakeholders,)
    dvalues: np.ndarray | None = None  # (n,) dependency weights

    def __post_init__(self):
        n = len(self.ids)
        if self.values.shape[0] != n or self.costs.shape != (n,):
            raise DataError("value and cost vectors must cover every requirement")
        if self.weights.shape != (self.values.shape[1],):
            raise DataError("one weight per stakeholder required")
        if (self.values < 0).any() or (self.costs < 0).any():
            raise DataError("scores and costs must be non-negative")
        if (self.weights < 0).any() or self.weights.sum() <= 0:
            raise DataError("weights must be non-negative with a positive sum")
        if self.dvalues is not None and self.dvalues.shape != (n,):
            raise DataError("dependency values must cover every requirement")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def weighted_values(self) -> np.ndarray:
        return self.values @ self.weights

    @classmethod
    def from_benchmark(
        cls,
        table: BenchmarkTable,
        weights: Sequence[float] | None = None,
        dvalues: DValueVector | None = None,
    ) -> "NrpProblem":
        values = np.asarray(table.values, dtype=float)
        if weights is None:
            weights = np.ones(values.shape[1])
        dv = None
        if dvalues is not None:
            dv = np.asarray([dvalues.values[rid] for rid in table.ids], dtype=float)
        return cls(
            ids=table.ids,
            values=values,
            costs=np.asarray(table.development, dtype=float),
            weights=np.asarray(weights, dtype=float),
            dvalues=dv,
        )


@dataclass(frozen=True)
class Solution:
    """One selection with its objective tuple (value, cost[, dvalue])."""

    x: tuple[int, ...]
    objectives: tuple[float, ...]

    @property
    def value(self) -> float:
        return self.objectives[0]

    @property
    def cost(self) -> float:
        return self.objectives[1]

    def selected(self, ids: Sequence[str]) -> tuple[str, ...]:
        return tuple(rid for rid, bit in zip(ids, self.x) if bit)


@dataclass(frozen=True)
class Front:
    """A set of mutually non-dominated solutions."""

    solutions: tuple[Solution, ...]

    def __len__(self) -> int:
        return len(self.solutions)

    def objective_tuples(self) -> list[tuple[float, ...]]:
        return [s.objectives for s in self.solutions]

    def value_cost_points(self) -> set[tuple[float, float]]:
        return {(s.objectives[0], s.objectives[1]) for s in self.solutions}


def _senses(n_objectives: int) -> tuple[int, ...]:
    if n_objectives == 2:
        return (1, -1)
    if n_objectives == 3:
        return (1, -1, 1)
    raise DataError(f"expected 2 or 3 objectives, got {n_objectives}")


def dominates(a: Sequence[float], b: Sequence[float], senses: Sequence[int] | None = None) -> bool:
    """True iff objective tuple ``a`` is at least as good everywhere and better somewhere.

    Default senses: maximize the first and third objectives, minimize the second.
    """
    if len(a) != len(b):
        raise DataError(f"objective arity mismatch: {len(a)} vs {len(b)}")
    if senses is None:
        senses = _senses(len(a))
    ca = [s * v for s, v in zip(senses, a)]
    cb = [s * v for s, v in zip(senses, b)]
    return all(x >= y for x, y in zip(ca, cb)) and any(x > y for x, y in zip(ca, cb))


@dataclass(frozen=True)
class SearchParams:
    population: int = 200
    generations: int = 50
    tournament: int = 5
    crossover_prob: float = 0.8
    mutation_prob: float | None = None  # None means 1/n
    seed: int = 0
    crowding: str = "full"  # "full" or "bi" (crowd on the value/cost projection)

    def __post_init__(self):
        if self.population < 2 or self.population % 2:
            raise ConfigurationError(f"population must be even and at least 2, got {self.population}")
        if self.generations < 0:
            raise ConfigurationError(f"generations must be non-negative, got {self.generations}")
        if self.tournament < 1:
            raise ConfigurationError(f"tournament size must be at least 1, got {self.tournament}")
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ConfigurationError(f"crossover probability {self.crossover_prob} outside [0, 1]")
        if self.mutation_prob is not None and not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigurationError(f"mutation probability {self.mutation_prob} outside [0, 1]")
        if self.crowding not in ("full", "bi"):
            raise ConfigurationError(f"crowding must be 'full' or 'bi', got {self.crowding!r}")


def _objective_matrix(pop: np.ndarray, problem: NrpProblem, objective_set: str) -> np.ndarray:
    """Raw objectives per row: value, cost, and the dependency sum in tri mode."""
    value = pop @ problem.weighted_values
    cost = pop @ problem.costs
    if objective_set == BI:
        return np.column_stack([value, cost])
    if objective_set == TRI:
        if problem.dvalues is None:
            raise ConfigurationError("tri-objective search needs dependency values on the problem")
        return np.column_stack([value, cost, pop @ problem.dvalues])
    raise ConfigurationError(f"unknown objective set {objective_set!r}")


def _canonical(objectives: np.ndarray) -> np.ndarray:
    canonical = objectives.copy()
    canonical[:, 1] = -canonical[:, 1]
    return canonical


def _fast_nondominated_ranks(canonical: np.ndarray) -> np.ndarray:
    """Front index per row (0 = best) by iterative peeling of the dominance matrix."""
    m = len(canonical)
    ge = (canonical[:, None, :] >= canonical[None, :, :]).all(axis=2)
    gt = (canonical[:, None, :] > canonical[None, :, :]).any(axis=2)
    dom = ge & gt  # dom[i, j]: i dominates j
    ranks = np.full(m, -1)
    remaining = np.ones(m, dtype=bool)
    rank = 0
    while remaining.any():
        dominator_counts = (dom & remaining[:, None]).sum(axis=0)
        current = remaining & (dominator_counts == 0)
        if not current.any():
            raise AssertionError("non-dominated sorting stalled")
        ranks[current] = rank
        remaining &= ~current
        rank += 1
    return ranks


def _crowding_distance(canonical: np.ndarray, members: np.ndarray) -> np.ndarray:
    """Crowding distances of one front's members (boundary points get inf)."""
    distances = np.zeros(len(members))
    if len(members) <= 2:
        return np.full(len(members), np.inf)
    for col in range(canonical.shape[1]):
        values = canonical[members, col]
        order = np.argsort(values, kind="stable")
        spread = values[order[-1]] - values[order[0]]
        distances[order[0]] = np.inf
        distances[order[-1]] = np.inf
        if spread == 0:
            continue
        gaps = (values[order[2:]] - values[order[:-2]]) / spread
        distances[order[1:-1]] += gaps
    return distances


def _rank_and_crowd(canonical: np.ndarray, crowd_columns: slice) -> tuple[np.ndarray, np.ndarray]:
    ranks = _fast_nondominated_ranks(canonical)
    crowding = np.zeros(len(canonical))
    for rank in range(ranks.max() + 1):
        members = np.flatnonzero(ranks == rank)
        crowding[members] = _crowding_distance(canonical[:, crowd_columns], members)
    return ranks, crowding


@dataclass(frozen=True)
class NsgaRun:
    """Outcome of one seeded search."""

    front: Front
    objective_set: str
    params: SearchParams
    evaluations: int
    first_front_sizes: tuple[int, ...] = field(default=())


def nsga2(problem: NrpProblem, params: SearchParams, objective_set: str = BI) -> NsgaRun:
    """Seeded NSGA-II; returns the first non-dominated front of the final population.

    Identical seeds and parameters reproduce the run bit for bit.
    """
    n = problem.n
    if n == 0:
        raise DataError("cannot search an empty problem")
    mutation_prob = params.mutation_prob if params.mutation_prob is not None else 1.0 / n
    crowd_columns = slice(0, 2) if params.crowding == "bi" else slice(None)
    rng = np.random.default_rng(np.random.PCG64(params.seed))

    pop = rng.integers(0, 2, size=(params.population, n), dtype=np.int8)
    objectives = _objective_matrix(pop, problem, objective_set)
    evaluations = params.population
    ranks, crowding = _rank_and_crowd(_canonical(objectives), crowd_columns)
    first_front_sizes = [int((ranks == 0).sum())]

    def tournament_pick() -> int:
        candidates = rng.integers(params.population, size=params.tournament)
        best = candidates[0]
        for c in candidates[1:]:
            if ranks[c] < ranks[best] or (ranks[c] == ranks[best] and crowding[c] > crowding[best]):
                best = c
        return int(best)

    for _ in range(params.generations):
        offspring = np.empty_like(pop)
        for pair in range(0, params.population, 2):
            a = pop[tournament_pick()].copy()
            b = pop[tournament_pick()].copy()
            if n > 1 and rng.random() < params.crossover_prob:
                point = int(rng.integers(1, n))
                a[point:], b[point:] = b[point:].copy(), a[point:].copy()
            flips = rng.random((2, n)) < mutation_prob
            a ^= flips[0]
            b ^= flips[1]
            offspring[pair] = a
            offspring[pair + 1] = b

        merged = np.vstack([pop, offspring])
        merged_objectives = np.vstack(
            [objectives, _objective_matrix(offspring, problem, objective_set)]
        )
        evaluations += params.population
        merged_ranks, merged_crowding = _rank_and_crowd(_canonical(merged_objectives), crowd_columns)

        chosen: list[int] = []
        for rank in range(merged_ranks.max() + 1):
            members = np.flatnonzero(merged_ranks == rank)
            if len(chosen) + len(members) <= params.population:
                chosen.extend(members.tolist())
                if len(chosen) == params.population:
                    break
            else:
                order = np.argsort(-merged_crowding[members], kind="stable")
                need = params.population - len(chosen)
                chosen.extend(members[order[:need]].tolist())
                break
        pop = merged[chosen]
        objectives = merged_objectives[chosen]
        ranks, crowding = _rank_and_crowd(_canonical(objectives), crowd_columns)
        first_front_sizes.append(int((ranks == 0).sum()))

    front_rows = np.flatnonzero(ranks == 0)
    seen: set[tuple[int, ...]] = set()
    solutions: list[Solution] = []
    for row in front_rows:
        bits = tuple(int(v) for v in pop[row])
        if bits in seen:
            continue
        seen.add(bits)
        solutions.append(Solution(x=bits, objectives=tuple(float(v) for v in objectives[row])))
    return NsgaRun(
        front=Front(solutions=tuple(solutions)),
        objective_set=objective_set,
        params=params,
        evaluations=evaluations,
        first_front_sizes=tuple(first_front_sizes),
    )


def brute_force_pareto(problem: NrpProblem, objective_set: str = BI) -> Front:
    """Exact Pareto front by enumerating all 2^n selections; refuses n > 20."""
    n = problem.n
    if n > BRUTE_FORCE_LIMIT:
        raise DataError(
            f"exhaustive enumeration limited to {BRUTE_FORCE_LIMIT} requirements, got {n}"
        )
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(np.int8)
    objectives = _objective_matrix(bits, problem, objective_set)
    canonical = _canonical(objectives)

    # Collapse duplicate objective tuples; the lowest mask represents each.
    _, representative = np.unique(canonical, axis=0, return_index=True)
    representative.sort()
    unique_canonical = canonical[representative]
    keep: list[int] = []
    if unique_canonical.shape[1] == 2:
        # Sweep from the best value down; a point survives iff it beats every
        # higher-value point on (negated) cost.
        order = np.lexsort((-unique_canonical[:, 1], -unique_canonical[:, 0]))
        best = -np.inf
        for i in order:
            if unique_canonical[i, 1] > best:
                keep.append(int(i))
                best = unique_canonical[i, 1]
        keep.sort()
    else:
        for i in range(len(representative)):
            diffs = unique_canonical - unique_canonical[i]
            dominated = ((diffs >= 0).all(axis=1) & (diffs > 0).any(axis=1)).any()
            if not dominated:
                keep.append(i)
    solutions = [
        Solution(
            x=tuple(int(v) for v in bits[representative[i]]),
            objectives=tuple(float(v) for v in objectives[representative[i]]),
        )
        for i in keep
    ]
    return Front(solutions=tuple(solutions))


def reference_front(fronts: Sequence[Front]) -> Front:
    """Merge fronts in (value, cost) space and keep the non-dominated remainder.

    Three-objective solutions are projected onto value and cost first;
    duplicate objective points collapse to their first occurrence.
    """
    merged: list[Solution] = []
    seen: set[tuple[float, float]] = set()
    for front in fronts:
        for solution in front.solutions:
            point = (solution.objectives[0], solution.objectives[1])
            if point in seen:
                continue
            seen.add(point)
            merged.append(Solution(x=solution.x, objectives=point))
    keep = [
        s
        for s in merged
        if not any(dominates(o.objectives, s.objectives) for o in merged if o is not s)
    ]
    return Front(solutions=tuple(keep))


def share_of_reference(front: Front, reference: Front) -> float:
    """Percentage of the front's distinct (value, cost) points lying on the reference."""
    if not reference.solutions:
        raise DataError("reference front is empty")
    points = front.value_cost_points()
    if not points:
        logger.warning("share_of_reference: empty front scores 0")
        return 0.0
    reference_points = reference.value_cost_points()
    return 100.0 * len(points & reference_points) / len(points)


def apply_requires_filter(front: Front, pairs: RequiresSet, ids: Sequence[str]) -> Front:
    """Drop solutions that select a requirement without its required counterpart."""
    index = {rid: i for i, rid in enumerate(ids)}
    kept = []
    for solution in front.solutions:
        violated = any(
            solution.x[index[p.from_id]] and not solution.x[index[p.to_id]]
            for p in pairs.pairs
            if p.from_id in index and p.to_id in index
        )
        if not violated:
            kept.append(solution)
    return Front(solutions=tuple(kept))


def write_front_csv(path: str | Path, front: Front) -> None:
    """Emit ``value,cost[,dvalue],bitstring`` rows for scatter plotting."""
    tri = any(len(s.objectives) == 3 for s in front.solutions)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["value", "cost", "dvalue", "bitstring"] if tri else ["value", "cost", "bitstring"])
        for s in front.solutions:
            bitstring = "".join(str(b) for b in s.x)
            row = [repr(v) for v in s.objectives]
            writer.writerow([*row, bitstring])


def write_run_manifest(path: str | Path, run: NsgaRun, dvalue_variant: str | None = None) -> None:
    """Persist search parameters and per-generation front sizes as JSON."""
    payload = {
        "objective_set": run.objective_set,
        "dvalue_variant": dvalue_variant,
        "evaluations": run.evaluations,
        "first_front_sizes": list(run.first_front_sizes),
        "front_size": len(run.front),
        "params": {
            "population": run.params.population,
            "generations": run.params.generations,
            "tournament": run.params.tournament,
            "crossover_prob": run.params.crossover_prob,
            "mutation_prob": run.params.mutation_prob,
            "seed": run.params.seed,
            "crowding": run.params.crowding,
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
