"""Corpus loading, release schedules, and review windows."""

from __future__ import annotations

import json
from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from feedprio import IntegrityError, ParseError
from feedprio.corpus import (
    FeedbackMessage,
    ReleaseSchedule,
    Requirement,
    build_instances,
    load_benchmark,
    load_messages,
    load_requirements,
    parse_period,
    review_window,
    schedule_from_requirements,
    window_reviews,
)


def req(rid: str, period: str, app: str = "app") -> Requirement:
    return Requirement(id=rid, text=f"feature {rid}", release_period=period, app=app)


def msg(mid: str, stamp: str, app: str = "app") -> FeedbackMessage:
    return FeedbackMessage(id=mid, text="text", timestamp=date.fromisoformat(stamp), app=app)


class TestParsePeriod:
    def test_month_index_is_absolute(self):
        assert parse_period("2024-01") == 2024 * 12
        assert parse_period("2024-12") == 2024 * 12 + 11
        assert parse_period("2025-01") - parse_period("2024-12") == 1

    @pytest.mark.parametrize("label", ["2024", "2024-1", "24-01", "2024-13", "2024-00", "abcd-ef", ""])
    def test_malformed_labels_rejected(self, label):
        with pytest.raises(ParseError):
            parse_period(label)


class TestReleaseSchedule:
    def test_periods_must_increase(self):
        with pytest.raises(IntegrityError):
            ReleaseSchedule(app="a", periods=(("2024-02", ("r1",)), ("2024-01", ("r2",))))

    def test_duplicate_period_labels_rejected(self):
        with pytest.raises(IntegrityError):
            ReleaseSchedule(app="a", periods=(("2024-01", ("r1",)), ("2024-01", ("r2",))))

    def test_requirement_in_two_periods_rejected(self):
        with pytest.raises(IntegrityError):
            ReleaseSchedule(app="a", periods=(("2024-01", ("r1",)), ("2024-02", ("r1",))))

    def test_derived_schedule_sorts_periods(self):
        rows = [req("r2", "2024-03"), req("r1", "2024-01"), req("r3", "2024-01")]
        schedule = schedule_from_requirements(rows)
        assert [label for label, _ in schedule.periods] == ["2024-01", "2024-03"]
        assert schedule.periods[0][1] == ("r1", "r3")

    def test_derived_schedule_needs_single_app(self):
        with pytest.raises(IntegrityError):
            schedule_from_requirements([req("r1", "2024-01", app="a"), req("r2", "2024-01", app="b")])


class TestReviewWindow:
    def test_two_year_window_with_one_month_buffer(self):
        # A 2025-02 release reads reviews from 2023-01-01 through 2025-01-31.
        assert review_window("2025-02") == (date(2023, 1, 1), date(2025, 1, 31))

    def test_window_end_handles_month_lengths(self):
        _, end = review_window("2024-03")
        assert end == date(2024, 2, 29)

    def test_window_spans_year_boundaries(self):
        start, end = review_window("2024-01")
        assert start == date(2021, 12, 1)
        assert end == date(2023, 12, 31)


class TestLoadRequirements:
    def test_shipped_corpus(self, notely_requirements):
        assert len(notely_requirements) == 15
        assert notely_requirements[0].id == "n1"
        assert {r.app for r in notely_requirements} == {"notely"}
        assert {r.release_period for r in notely_requirements} == {"2024-06", "2024-07", "2024-08"}

    def test_json_input(self, tmp_path):
        path = tmp_path / "reqs.json"
        path.write_text(json.dumps([{"id": "r1", "text": "t", "period": "2024-01", "app": "a"}]))
        rows = load_requirements(path)
        assert rows == [Requirement(id="r1", text="t", release_period="2024-01", app="a")]

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "reqs.csv"
        path.write_text("id,text,period,app\nr1,t,2024-01,a\nr1,u,2024-02,a\n")
        with pytest.raises(IntegrityError):
            load_requirements(path)

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "reqs.csv"
        path.write_text("id,text,period\nr1,t,2024-01\n")
        with pytest.raises(ParseError):
            load_requirements(path)

    def test_empty_text_rejected(self, tmp_path):
        path = tmp_path / "reqs.csv"
        path.write_text("id,text,period,app\nr1,,2024-01,a\n")
        with pytest.raises(ParseError):
            load_requirements(path)

    def test_schedule_placement_enforced(self, tmp_path):
        path = tmp_path / "reqs.csv"
        path.write_text("id,text,period,app\nr1,t,2024-02,a\n")
        schedule = ReleaseSchedule(app="a", periods=(("2024-01", ("r1",)),))
        with pytest.raises(IntegrityError):
            load_requirements(path, schedule=schedule)


class TestLoadMessages:
    def test_shipped_corpus(self, notely_messages):
        assert len(notely_messages) == 28
        assert all(1 <= m.rating <= 5 for m in notely_messages if m.rating is not None)
        assert notely_messages[0].timestamp == date(2022, 2, 10)

    def test_blank_rating_becomes_none(self, tmp_path):
        path = tmp_path / "msgs.csv"
        path.write_text("id,text,timestamp,app,rating\nm1,t,2024-01-05,a,\n")
        assert load_messages(path)[0].rating is None

    def test_bad_timestamp_rejected(self, tmp_path):
        path = tmp_path / "msgs.csv"
        path.write_text("id,text,timestamp,app,rating\nm1,t,2024-13-05,a,3\n")
        with pytest.raises(ParseError):
            load_messages(path)

    @pytest.mark.parametrize("rating", ["0", "6", "x"])
    def test_bad_rating_rejected(self, tmp_path, rating):
        path = tmp_path / "msgs.csv"
        path.write_text(f"id,text,timestamp,app,rating\nm1,t,2024-01-05,a,{rating}\n")
        with pytest.raises(ParseError):
            load_messages(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "msgs.csv"
        path.write_text("id,text,timestamp,app,rating\nm1,t,2024-01-05,a,3\nm1,u,2024-01-06,a,4\n")
        with pytest.raises(IntegrityError):
            load_messages(path)


class TestBuildInstances:
    def test_consecutive_pairs_pool_requirements(self):
        rows = [req("r1", "2024-01"), req("r2", "2024-01"), req("r3", "2024-02"), req("r4", "2024-03")]
        instances = build_instances(schedule_from_requirements(rows), rows)
        assert [i.id for i in instances] == ["app/2024-01+2024-02", "app/2024-02+2024-03"]
        first = instances[0]
        assert first.n == 3 and first.k == 2
        assert first.ground_truth == frozenset({"r1", "r2"})
        # Earlier-period requirements come first in the pooled tuple.
        assert [r.id for r in first.requirements] == ["r1", "r2", "r3"]
        assert first.window == review_window("2024-01")

    def test_truth_plus_later_equals_n(self, notely_requirements):
        schedule = schedule_from_requirements(notely_requirements)
        for inst in build_instances(schedule, notely_requirements):
            later = [r for r in inst.requirements if r.id not in inst.ground_truth]
            assert inst.k + len(later) == inst.n

    def test_empty_period_skipped_with_warning(self, caplog):
        rows = [req("r1", "2024-01"), req("r2", "2024-03")]
        schedule = ReleaseSchedule(
            app="app", periods=(("2024-01", ("r1",)), ("2024-02", ()), ("2024-03", ("r2",)))
        )
        with caplog.at_level("WARNING"):
            instances = build_instances(schedule, rows)
        assert instances == []
        assert "no requirements" in caplog.text

    def test_unknown_id_rejected(self):
        rows = [req("r1", "2024-01"), req("r2", "2024-02")]
        schedule = ReleaseSchedule(app="app", periods=(("2024-01", ("r1",)), ("2024-02", ("r2", "r9"))))
        with pytest.raises(IntegrityError):
            build_instances(schedule, rows)

    def test_shipped_corpus_yields_two_instances(self, notely_requirements):
        schedule = schedule_from_requirements(notely_requirements)
        instances = build_instances(schedule, notely_requirements)
        assert [(i.n, i.k) for i in instances] == [(10, 4), (11, 6)]

    @given(sizes=st.lists(st.integers(min_value=1, max_value=4), min_size=2, max_size=5))
    def test_instance_count_is_period_pairs(self, sizes):
        rows = [
            req(f"r{p}_{j}", f"2024-{p + 1:02d}")
            for p, count in enumerate(sizes)
            for j in range(count)
        ]
        instances = build_instances(schedule_from_requirements(rows), rows)
        assert len(instances) == len(sizes) - 1
        for inst in instances:
            assert inst.k < inst.n


class TestWindowReviews:
    def test_bounds_inclusive_and_app_filtered(self):
        rows = [req("r1", "2025-02"), req("r2", "2025-03")]
        inst = build_instances(schedule_from_requirements(rows), rows)[0]
        messages = [
            msg("m1", "2022-12-31"),          # day before the window opens
            msg("m2", "2023-01-01"),          # first admissible day
            msg("m3", "2025-01-31"),          # last admissible day
            msg("m4", "2025-02-01"),          # release month, excluded
            msg("m5", "2024-06-15", app="other"),
        ]
        assert [m.id for m in window_reviews(messages, inst)] == ["m2", "m3"]

    def test_sorted_by_timestamp_then_id(self):
        rows = [req("r1", "2025-02"), req("r2", "2025-03")]
        inst = build_instances(schedule_from_requirements(rows), rows)[0]
        messages = [msg("mb", "2024-05-01"), msg("ma", "2024-05-01"), msg("mc", "2024-04-30")]
        assert [m.id for m in window_reviews(messages, inst)] == ["mc", "ma", "mb"]

    def test_short_corpus_returns_what_exists(self, notely_requirements, notely_messages):
        instances = build_instances(schedule_from_requirements(notely_requirements), notely_requirements)
        counts = [len(window_reviews(notely_messages, inst)) for inst in instances]
        assert counts == [21, 24]


class TestLoadBenchmark:
    def test_shipped_table(self, benchmark):
        assert len(benchmark.ids) == 50
        assert len(benchmark.values[0]) == 4
        assert all(v > 0 for row in benchmark.values for v in row)
        assert all(c > 0 for c in benchmark.development)

    def test_missing_value_columns_rejected(self, tmp_path):
        path = tmp_path / "bench.csv"
        path.write_text("id,text,design,development,qa\nr1,t,1,2,3\n")
        with pytest.raises(ParseError):
            load_benchmark(path)

    def test_non_numeric_cell_rejected(self, tmp_path):
        path = tmp_path / "bench.csv"
        path.write_text("id,text,value_s1,design,development,qa\nr1,t,x,1,2,3\n")
        with pytest.raises(ParseError):
            load_benchmark(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "bench.csv"
        path.write_text("")
        with pytest.raises(ParseError):
            load_benchmark(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "bench.csv"
        path.write_text(
            "id,text,value_s1,design,development,qa\nr1,t,1,1,2,3\nr1,u,2,1,2,3\n"
        )
        with pytest.raises(IntegrityError):
            load_benchmark(path)
