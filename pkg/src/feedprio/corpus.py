"""Ingestion of requirements and app reviews, and time-windowed instance construction.

A prioritization instance pools the requirements of two consecutive release
periods; the earlier period's requirements are its ground truth. Admissible
reviews for an instance end one release cycle (one month) before the earlier
period and reach back two years from that cutoff month, inclusive.

All values are immutable after construction; ingestion is single-threaded.
"""

from __future__ import annotations

import calendar
import csv
import json
import logging
import re
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

from .errors import IntegrityError, ParseError

logger = logging.getLogger(__name__)

_PERIOD_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")

# Review window length, in whole months before (and including) the cutoff month.
WINDOW_MONTHS = 24


@dataclass(frozen=True)
class Requirement:
    """A candidate feature mined from a release note."""

    id: str
    text: str
    release_period: str  # "YYYY-MM"
    app: str


@dataclass(frozen=True)
class FeedbackMessage:
    """One app review."""

    id: str
    text: str
    timestamp: date
    app: str
    rating: int | None = None


@dataclass(frozen=True)
class ReleaseSchedule:
    """Ordered release periods of one app, each with its requirement ids."""

    app: str
    periods: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        labels = [label for label, _ in self.periods]
        if labels != sorted(labels) or len(set(labels)) != len(labels):
            raise IntegrityError(f"schedule periods for {self.app!r} must be strictly increasing")
        seen: set[str] = set()
        for label, ids in self.periods:
            for rid in ids:
                if rid in seen:
                    raise IntegrityError(f"requirement {rid!r} appears in more than one period")
                seen.add(rid)


@dataclass(frozen=True)
class PrioritizationInstance:
    """n candidate requirements from two consecutive periods, truth = the earlier k."""

    id: str
    app: str
    requirements: tuple[Requirement, ...]
    ground_truth: frozenset[str]
    window: tuple[date, date]

    @property
    def n(self) -> int:
        return len(self.requirements)

    @property
    def k(self) -> int:
        return len(self.ground_truth)


def parse_period(label: str) -> int:
    """Validate a YYYY-MM label and return its absolute month index."""
    if not _PERIOD_RE.match(label):
        raise ParseError(f"release period {label!r} is not of the form YYYY-MM")
    year, month = int(label[:4]), int(label[5:7])
    return year * 12 + (month - 1)


def _month_bounds(month_index: int) -> tuple[date, date]:
    year, month = divmod(month_index, 12)
    month += 1
    last = calendar.monthrange(year, month)[1]
    return date(year, month, 1), date(year, month, last)


def _rows_from_file(path: Path) -> list[dict]:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if not isinstance(data, list):
            raise ParseError(f"{path}: expected a JSON array of objects")
        return data
    return list(csv.DictReader(text.splitlines()))


def load_requirements(path: str | Path, schedule: ReleaseSchedule | None = None) -> list[Requirement]:
    """Read a requirements file (CSV header ``id,text,period,app`` or JSON array).

    When a schedule is supplied, every requirement must sit in the period the
    schedule assigns it. Duplicate ids raise :class:`IntegrityError`; malformed
    rows raise :class:`ParseError` naming the row.
    """
    path = Path(path)
    placement = {}
    if schedule is not None:
        placement = {rid: label for label, ids in schedule.periods for rid in ids}
    requirements: list[Requirement] = []
    seen: set[str] = set()
    for i, row in enumerate(_rows_from_file(path), start=1):
        try:
            rid = str(row["id"]).strip()
            text = str(row["text"]).strip()
            period = str(row["period"]).strip()
            app = str(row["app"]).strip()
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path} row {i}: missing field {exc}") from exc
        if not rid or not text:
            raise ParseError(f"{path} row {i}: id and text must be non-empty")
        parse_period(period)
        if rid in seen:
            raise IntegrityError(f"{path} row {i}: duplicate requirement id {rid!r}")
        seen.add(rid)
        if schedule is not None and placement.get(rid) != period:
            raise IntegrityError(
                f"{path} row {i}: requirement {rid!r} not scheduled for period {period}"
            )
        requirements.append(Requirement(id=rid, text=text, release_period=period, app=app))
    return requirements


def load_messages(path: str | Path) -> list[FeedbackMessage]:
    """Read a reviews file (CSV header ``id,text,timestamp,app,rating`` or JSON array)."""
    path = Path(path)
    messages: list[FeedbackMessage] = []
    seen: set[str] = set()
    for i, row in enumerate(_rows_from_file(path), start=1):
        try:
            mid = str(row["id"]).strip()
            text = str(row["text"]).strip()
            stamp = str(row["timestamp"]).strip()
            app = str(row["app"]).strip()
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path} row {i}: missing field {exc}") from exc
        if not mid or not text:
            raise ParseError(f"{path} row {i}: id and text must be non-empty")
        try:
            ts = date.fromisoformat(stamp)
        except ValueError as exc:
            raise ParseError(f"{path} row {i}: bad timestamp {stamp!r}") from exc
        raw_rating = row.get("rating")
        rating = None
        if raw_rating not in (None, ""):
            try:
                rating = int(raw_rating)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path} row {i}: bad rating {raw_rating!r}") from exc
            if not 1 <= rating <= 5:
                raise ParseError(f"{path} row {i}: rating {rating} outside 1-5")
        if mid in seen:
            raise IntegrityError(f"{path} row {i}: duplicate message id {mid!r}")
        seen.add(mid)
        messages.append(FeedbackMessage(id=mid, text=text, timestamp=ts, app=app, rating=rating))
    return messages


def schedule_from_requirements(requirements: Sequence[Requirement]) -> ReleaseSchedule:
    """Derive the release schedule of a single app from its requirement rows."""
    apps = {r.app for r in requirements}
    if len(apps) != 1:
        raise IntegrityError(f"expected requirements of exactly one app, got {sorted(apps)}")
    by_period: dict[str, list[str]] = {}
    for r in requirements:
        by_period.setdefault(r.release_period, []).append(r.id)
    periods = tuple((label, tuple(by_period[label])) for label in sorted(by_period))
    return ReleaseSchedule(app=apps.pop(), periods=periods)


def review_window(earlier_period: str) -> tuple[date, date]:
    """Admissible review range for an instance releasing in ``earlier_period``.

    The window ends on the last day of the month before the release month
    (one-cycle buffer) and opens WINDOW_MONTHS before that cutoff month,
    on the first of the month.
    """
    cutoff = parse_period(earlier_period) - 1
    start, _ = _month_bounds(cutoff - WINDOW_MONTHS)
    _, end = _month_bounds(cutoff)
    return start, end


def build_instances(
    schedule: ReleaseSchedule, requirements: Sequence[Requirement]
) -> list[PrioritizationInstance]:
    """One instance per consecutive period pair; truth = the earlier period's ids.

    Pairs touching a period with zero requirements are skipped with a warning.
    """
    by_id = {r.id: r for r in requirements}
    instances: list[PrioritizationInstance] = []
    for (earlier, earlier_ids), (later, later_ids) in zip(schedule.periods, schedule.periods[1:]):
        if not earlier_ids or not later_ids:
            empty = earlier if not earlier_ids else later
            logger.warning("skipping instance %s+%s: period %s has no requirements", earlier, later, empty)
            continue
        missing = [rid for rid in (*earlier_ids, *later_ids) if rid not in by_id]
        if missing:
            raise IntegrityError(f"schedule references unknown requirement ids {missing}")
        pooled = tuple(by_id[rid] for rid in (*earlier_ids, *later_ids))
        instances.append(
            PrioritizationInstance(
                id=f"{schedule.app}/{earlier}+{later}",
                app=schedule.app,
                requirements=pooled,
                ground_truth=frozenset(earlier_ids),
                window=review_window(earlier),
            )
        )
    return instances


def window_reviews(
    messages: Iterable[FeedbackMessage], instance: PrioritizationInstance
) -> list[FeedbackMessage]:
    """Messages of the instance's app falling inside its review window.

    When the corpus starts after the window opens, whatever earlier reviews
    exist are simply all returned; an empty result is permitted.
    """
    start, end = instance.window
    hits = [
        m
        for m in messages
        if m.app == instance.app and start <= m.timestamp <= end
    ]
    hits.sort(key=lambda m: (m.timestamp, m.id))
    return hits


@dataclass(frozen=True)
class BenchmarkTable:
    """A value/cost benchmark: per-stakeholder scores and three resource columns."""

    ids: tuple[str, ...]
    texts: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]  # one row per requirement
    design: tuple[float, ...]
    development: tuple[float, ...]
    qa: tuple[float, ...]


def load_benchmark(path: str | Path) -> BenchmarkTable:
    """Read an NRP benchmark CSV: ``id,text,value_s1..value_sK,design,development,qa``."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty benchmark file")
        value_cols = [i for i, name in enumerate(header) if name.startswith("value_s")]
        expected = {"id", "text", "design", "development", "qa"}
        if not expected.issubset(header) or not value_cols:
            raise ParseError(f"{path}: header must contain id,text,value_s*,design,development,qa")
        idx = {name: header.index(name) for name in expected}
        ids, texts, values, design, development, qa = [], [], [], [], [], []
        seen: set[str] = set()
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                rid = row[idx["id"]].strip()
                if rid in seen:
                    raise IntegrityError(f"{path} row {i}: duplicate id {rid!r}")
                seen.add(rid)
                ids.append(rid)
                texts.append(row[idx["text"]].strip())
                values.append(tuple(float(row[c]) for c in value_cols))
                design.append(float(row[idx["design"]]))
                development.append(float(row[idx["development"]]))
                qa.append(float(row[idx["qa"]]))
            except (ValueError, IndexError) as exc:
                raise ParseError(f"{path} row {i}: {exc}") from exc
    return BenchmarkTable(
        ids=tuple(ids),
        texts=tuple(texts),
        values=tuple(values),
        design=tuple(design),
        development=tuple(development),
        qa=tuple(qa),
    )
