#!/usr/bin/env python3
"""Replicate the word-processor benchmark experiment end to end.

Mines "requires" pairs from the recorded chat fixtures, derives the
dependency-value vectors, runs the ten-seed bi- vs tri-objective NSGA-II
comparison for all five variants, and collects everything into a report.
Results land under out/wordprocessor.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from feedprio.cli import main  # noqa: E402

CONFIGS = ROOT / "configs"


def run() -> int:
    for command, config in (
        ("mine", "wordprocessor_mine.json"),
        ("dvalue", "wordprocessor_nrp.json"),
        ("nrp", "wordprocessor_nrp.json"),
        ("report", "wordprocessor_nrp.json"),
    ):
        code = main([command, "--config", str(CONFIGS / config)])
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run())
