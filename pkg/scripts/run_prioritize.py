#!/usr/bin/env python3
"""Run the review-driven prioritization experiment on the notely corpus.

Validates the corpus, scores every instance with the direct and
cluster-based methods (plus the embedding variants when --embed is given),
evaluates the rankings at the five cutoffs, and writes a report. Results
land under out/notely or out/notely_embed.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from feedprio.cli import main  # noqa: E402

CONFIGS = ROOT / "configs"


def run(embed: bool) -> int:
    config = str(CONFIGS / ("notely_embed.json" if embed else "notely.json"))
    for command in ("ingest", "topics", "prioritize", "report"):
        code = main([command, "--config", config])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run("--embed" in sys.argv[1:]))
