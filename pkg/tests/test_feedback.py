"""Sentence splitting, sentiment scoring, and message property aggregation."""

from __future__ import annotations

from datetime import date

import pytest
from hypothesis import given
from hypothesis import strategies as st

from feedprio import ParseError
from feedprio.corpus import FeedbackMessage
from feedprio.feedback import (
    NEGATIVE,
    NEUTRAL,
    POSITIVE,
    FeedbackProperties,
    LexiconSentimentScorer,
    RuleIntentScorer,
    SentenceScore,
    aggregate_properties,
    extract_properties,
    load_lexicon,
    load_score_file,
    score_message,
    split_sentences,
)


def msg(text: str, mid: str = "m1") -> FeedbackMessage:
    return FeedbackMessage(id=mid, text=text, timestamp=date(2024, 1, 1), app="a")


sentence_scores = st.builds(
    SentenceScore,
    polarity=st.sampled_from([POSITIVE, NEGATIVE, NEUTRAL]),
    score=st.floats(0.0, 1.0),
    intent=st.sampled_from([0.0, 1.0]),
)


class TestSplitSentences:
    def test_terminal_punctuation_kept(self):
        assert split_sentences("Good app. Needs work!") == ["Good app.", "Needs work!"]

    def test_abbreviations_do_not_split(self):
        out = split_sentences("Some formats, e.g. PDF, are missing. Fix it.")
        assert out == ["Some formats, e.g. PDF, are missing.", "Fix it."]

    def test_trailing_fragment_counts(self):
        assert split_sentences("Crashes a lot. No autosave") == ["Crashes a lot.", "No autosave"]

    def test_repeated_punctuation_stays_together(self):
        assert split_sentences("Why?! Broken.") == ["Why?!", "Broken."]

    def test_empty_text(self):
        assert split_sentences("") == []
        assert split_sentences("   ") == []


class TestSentenceScore:
    def test_polarity_validated(self):
        with pytest.raises(ValueError):
            SentenceScore(polarity="meh", score=0.5, intent=0.0)

    @pytest.mark.parametrize("field", ["score", "intent"])
    @pytest.mark.parametrize("value", [-0.1, 1.1])
    def test_ranges_validated(self, field, value):
        kwargs = {"polarity": POSITIVE, "score": 0.5, "intent": 0.0, field: value}
        with pytest.raises(ValueError):
            SentenceScore(**kwargs)


class TestLexicon:
    def test_shipped_lexicon_loads(self):
        lexicon = load_lexicon()
        assert len(lexicon) > 200
        assert lexicon["great"] > 0
        assert lexicon["crash"] < 0

    def test_custom_file_with_comments(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("# comment\ngood,2\nbad,-2\n\n")
        assert load_lexicon(path) == {"good": 2.0, "bad": -2.0}

    def test_bad_valence_rejected(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("good,two\n")
        with pytest.raises(ParseError):
            load_lexicon(path)

    def test_empty_lexicon_rejected(self, tmp_path):
        path = tmp_path / "lex.txt"
        path.write_text("# only a comment\n")
        with pytest.raises(ParseError):
            load_lexicon(path)


class TestLexiconSentimentScorer:
    @pytest.fixture()
    def scorer(self):
        lexicon = {"great": 3.0, "good": 2.0, "bad": -2.0, "crash": -3.0, "ok": 1.0, "meh": -1.0}
        return LexiconSentimentScorer(lexicon=lexicon)

    def test_positive_sentence(self, scorer):
        out = scorer.score_sentence("This app is great")
        assert out.polarity == POSITIVE
        # One matched token of valence 3 against saturation 4.
        assert out.score == pytest.approx(0.75)

    def test_negative_sentence(self, scorer):
        out = scorer.score_sentence("It can crash and lose work")
        assert out.polarity == NEGATIVE
        assert out.score == pytest.approx(0.75)

    def test_no_matches_is_neutral_with_intent(self, scorer):
        out = scorer.score_sentence("Please add folders")
        assert out.polarity == NEUTRAL
        assert out.score == 0.0
        assert out.intent == 1.0

    def test_cancelling_valences_are_neutral(self, scorer):
        out = scorer.score_sentence("ok but meh")
        assert out.polarity == NEUTRAL
        assert out.score == 0.0

    def test_strength_saturates_at_one(self):
        scorer = LexiconSentimentScorer(lexicon={"awful": -9.0})
        assert scorer.score_sentence("awful").score == 1.0

    def test_shipped_lexicon_smoke(self):
        scorer = LexiconSentimentScorer()
        assert scorer.score_sentence("Great app, works beautifully").polarity == POSITIVE
        assert scorer.score_sentence("Terrible, crashes constantly").polarity == NEGATIVE


class TestRuleIntentScorer:
    @pytest.mark.parametrize(
        "sentence",
        [
            "Please add dark mode",
            "add folders to organize notes",
            "It would be nice to sort by date",
            "I wish it synced faster",
            "Can you support markdown?",
            "The app should have an undo button",
            "Backup is missing entirely",
            "Feature request: widgets",
            "If only there were tags",
            "I want an option to export",
            "Needs the ability to lock notes",
            "PLEASE FIX THIS",
        ],
    )
    def test_request_patterns_fire(self, sentence):
        assert RuleIntentScorer().score(sentence) == 1.0

    @pytest.mark.parametrize(
        "sentence",
        ["Works fine for me", "Crashed twice today", "The editor is fast"],
    )
    def test_plain_statements_do_not_fire(self, sentence):
        assert RuleIntentScorer().score(sentence) == 0.0


class TestAggregateProperties:
    def test_polarity_specific_averages(self):
        scores = [
            SentenceScore(NEGATIVE, 0.8, 1.0),
            SentenceScore(POSITIVE, 0.4, 0.0),
            SentenceScore(NEUTRAL, 0.0, 0.0),
            SentenceScore(NEGATIVE, 0.2, 1.0),
        ]
        props = aggregate_properties(scores)
        assert props.negativity == pytest.approx(0.5)    # (0.8 + 0.2) / 2
        assert props.positivity == pytest.approx(0.4)    # single positive sentence
        assert props.intention == pytest.approx(0.5)     # 2 of 4 sentences
        assert (props.n_sentences, props.n_negative, props.n_positive) == (4, 2, 1)
        assert props.total == pytest.approx(1.4)

    def test_missing_polarity_contributes_zero(self):
        props = aggregate_properties([SentenceScore(POSITIVE, 0.6, 0.0)])
        assert props.negativity == 0.0
        assert props.positivity == pytest.approx(0.6)

    def test_empty_message_is_all_zeros(self):
        props = aggregate_properties([])
        assert (props.negativity, props.positivity, props.intention) == (0.0, 0.0, 0.0)
        assert props.total == 0.0

    def test_count_invariant_enforced(self):
        with pytest.raises(ValueError):
            FeedbackProperties(0.0, 0.0, 0.0, n_sentences=1, n_negative=1, n_positive=1)

    @given(st.lists(sentence_scores, max_size=8))
    def test_components_stay_in_unit_interval(self, scores):
        props = aggregate_properties(scores)
        for component in (props.negativity, props.positivity, props.intention):
            assert 0.0 <= component <= 1.0
        assert props.n_negative + props.n_positive <= props.n_sentences


class TestScoreMessage:
    def test_one_score_per_sentence(self):
        scores = score_message(msg("Good. Bad. Whatever."), LexiconSentimentScorer())
        assert len(scores) == 3

    def test_scorer_failure_becomes_neutral(self, caplog):
        class Broken:
            def score_sentence(self, sentence):
                raise RuntimeError("boom")

        with caplog.at_level("WARNING"):
            scores = score_message(msg("One. Two."), Broken())
        assert all(s.polarity == NEUTRAL and s.score == 0.0 for s in scores)
        assert "using neutral" in caplog.text


class TestScoreFile:
    def test_shipped_overrides_parse(self):
        overrides = load_score_file("data/notely/sentence_scores.csv")
        assert set(overrides) == {"m12", "m07", "m01"}
        assert overrides["m12"][0].polarity == NEGATIVE

    def test_bad_polarity_rejected(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("message_id,sentence_index,polarity,score,intent\nm1,0,meh,0.5,0\n")
        with pytest.raises(ParseError):
            load_score_file(path)

    def test_negative_index_rejected(self, tmp_path):
        path = tmp_path / "scores.csv"
        path.write_text("message_id,sentence_index,polarity,score,intent\nm1,-1,pos,0.5,0\n")
        with pytest.raises(ParseError):
            load_score_file(path)

    def test_override_replaces_sentence(self):
        overrides = {"m1": {0: SentenceScore(NEGATIVE, 0.9, 0.0)}}
        props = extract_properties([msg("This app is great.")], overrides=overrides)["m1"]
        assert props.negativity == pytest.approx(0.9)
        assert props.positivity == 0.0

    def test_out_of_range_override_ignored(self, caplog):
        overrides = {"m1": {7: SentenceScore(NEGATIVE, 0.9, 0.0)}}
        with caplog.at_level("WARNING"):
            props = extract_properties([msg("Only one sentence.")], overrides=overrides)["m1"]
        assert props.negativity == 0.0
        assert "ignored" in caplog.text


class TestExtractProperties:
    def test_shipped_corpus_properties(self, notely_messages):
        props = extract_properties(notely_messages)
        assert set(props) == {m.id for m in notely_messages}
        totals = [p.total for p in props.values()]
        assert all(t >= 0.0 for t in totals)
        assert any(t > 0.0 for t in totals)
        assert any(p.intention > 0 for p in props.values())
        assert any(p.negativity > 0 for p in props.values())
        assert any(p.positivity > 0 for p in props.values())
