"""Shared fixtures: repository data paths and pre-mined requires pairs."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from feedprio.corpus import load_benchmark, load_messages, load_requirements
from feedprio.llmclient import FixtureClient
from feedprio.mining import (
    RequiresSet,
    aggregate,
    build_prompt,
    parse_requires,
    union_pairs,
)

REPO = Path(__file__).resolve().parent.parent
DATA = REPO / "data"
WORDPROCESSOR = DATA / "wordprocessor"
NOTELY = DATA / "notely"


@pytest.fixture(scope="session")
def benchmark():
    return load_benchmark(WORDPROCESSOR / "benchmark.csv")


@pytest.fixture(scope="session")
def notely_requirements():
    return load_requirements(NOTELY / "requirements.csv")


@pytest.fixture(scope="session")
def notely_messages():
    return load_messages(NOTELY / "reviews.csv")


@pytest.fixture(scope="session")
def cluster_map() -> dict[str, list[str]]:
    """Requirement clusters used for the pooled mining prompts."""
    members: dict[str, list[str]] = {}
    lines = (WORDPROCESSOR / "clusters.csv").read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        cid, rid = line.split(",")
        members.setdefault(cid, []).append(rid)
    return members


@pytest.fixture(scope="session")
def gold_pairs() -> set[tuple[str, str]]:
    lines = (WORDPROCESSOR / "gold_pairs.csv").read_text(encoding="utf-8").splitlines()
    return {tuple(line.split(",")) for line in lines[1:]}


@pytest.fixture(scope="session")
def mined_pairs(benchmark, cluster_map) -> dict[str, RequiresSet]:
    """Baseline, pooled, and combined pair sets mined from the shipped fixtures."""
    client = FixtureClient.from_file(WORDPROCESSOR / "llm_fixtures.json")
    by_id = dict(zip(benchmark.ids, benchmark.texts))
    known = set(benchmark.ids)

    baseline_prompt = build_prompt([(rid, by_id[rid]) for rid in benchmark.ids])
    baseline = parse_requires(client.complete(baseline_prompt), known, "baseline")

    cluster_sets = []
    for cid in sorted(cluster_map, key=int):
        members = cluster_map[cid]
        prompt = build_prompt([(rid, by_id[rid]) for rid in members])
        cluster_sets.append(
            parse_requires(client.complete(prompt), known, f"cluster-{cid}")
        )
    pooled = union_pairs(cluster_sets, "irefeed")
    combined = aggregate(baseline, cluster_sets)
    return {"baseline": baseline, "irefeed": pooled, "combined": combined}


@pytest.fixture(scope="session")
def pairs_csv(tmp_path_factory, mined_pairs) -> Path:
    """Combined pairs written once for solver-facing tests."""
    from feedprio.mining import write_pairs_csv

    path = tmp_path_factory.mktemp("pairs") / "pairs_combined.csv"
    write_pairs_csv(path, mined_pairs["combined"])
    return path


def write_config(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path
