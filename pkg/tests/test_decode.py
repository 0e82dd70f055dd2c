import numpy as np
import pytest

from graphkpe.corpus import Document, derive_bio_labels
from graphkpe.decode import decode_bio
from graphkpe.evaluation import normalize_phrase
from graphkpe.tagger import TagPrediction

from synth_data import make_random_labeled_corpus


def probs_for(labels, confidences):
    order = {"B": 0, "I": 1, "O": 2}
    probs = np.full((len(labels), 3), 0.0)
    for t, (lab, conf) in enumerate(zip(labels, confidences)):
        rest = (1.0 - conf) / 2
        probs[t] = rest
        probs[t, order[lab]] = conf
    return TagPrediction.from_probs(probs)


class TestDecode:
    def test_single_span(self):
        pred = TagPrediction.from_labels(["B", "I", "O"])
        out = decode_bio(["graph", "nets", "x"], pred)
        assert out.texts() == ["graph nets"]

    def test_orphan_inside_repaired(self):
        pred = TagPrediction.from_labels(["O", "I", "I"])
        out = decode_bio(["x", "deep", "nets"], pred)
        assert out.texts() == ["deep nets"]

    def test_leading_inside_repaired(self):
        pred = TagPrediction.from_labels(["I", "O"])
        out = decode_bio(["deep", "x"], pred)
        assert out.texts() == ["deep"]

    def test_adjacent_b_starts_new_span(self):
        pred = TagPrediction.from_labels(["B", "B"])
        out = decode_bio(["graph", "nets"], pred)
        assert out.texts() == ["graph", "nets"]

    def test_span_score_is_mean_of_top_probabilities(self):
        pred = probs_for(["B", "I", "O"], [0.9, 0.7, 0.8])
        out = decode_bio(["a", "b", "c"], pred)
        assert out.phrases[0].score == pytest.approx((0.9 + 0.7) / 2)

    def test_duplicates_merge_keeping_max_score(self):
        pred = probs_for(["B", "O", "B"], [0.6, 0.9, 0.8])
        out = decode_bio(["Graph", "x", "graph"], pred)
        assert len(out.phrases) == 1
        assert out.phrases[0].score == pytest.approx(0.8)

    def test_sorted_by_score_then_first_occurrence(self):
        pred = probs_for(["B", "O", "B", "O", "B"], [0.7, 0.5, 0.9, 0.5, 0.7])
        out = decode_bio(["a", "x", "b", "y", "c"], pred)
        assert out.texts() == ["b", "a", "c"]
        scores = [p.score for p in out.phrases]
        assert scores == sorted(scores, reverse=True)

    def test_no_duplicate_normalized_phrases(self):
        pred = TagPrediction.from_labels(["B", "O", "B", "O", "B"])
        out = decode_bio(["cats", "x", "cat", "y", "Cats"], pred)
        norms = [normalize_phrase(t) for t in out.texts()]
        assert len(norms) == len(set(norms)) == 1

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            decode_bio(["a"], TagPrediction.from_labels(["B", "I"]))

    def test_record_shape(self):
        pred = TagPrediction.from_labels(["B"])
        rec = decode_bio(["graph"], pred).to_record("d1")
        assert rec == {"id": "d1", "keyphrases": [{"text": "graph", "score": 1.0}]}

    def test_punctuation_only_span_dropped(self):
        pred = TagPrediction.from_labels(["B", "O"])
        out = decode_bio([".", "x"], pred)
        assert out.texts() == []


class TestRoundTripWithGoldLabels:
    def test_gold_labels_recover_in_text_gold_set(self):
        # documents built so gold phrases never overlap in the text:
        # decoding the derived labels must recover exactly the in-text
        # normalized gold set
        for doc in make_random_labeled_corpus(50, seed=33):
            labeled = derive_bio_labels(doc)
            decoded = decode_bio(labeled.tokens, TagPrediction.from_labels(labeled.labels))
            got = {normalize_phrase(t) for t in decoded.texts()}
            gold_norm = {normalize_phrase(g) for g in doc.gold_keyphrases}
            in_text = set()
            n = len(labeled.tokens)
            norm_tok = [normalize_phrase(t) for t in labeled.tokens]
            for i in range(n):
                for j in range(i, min(i + 6, n)):
                    span = " ".join(s for s in norm_tok[i : j + 1] if s)
                    if span in gold_norm:
                        in_text.add(span)
            assert got == in_text
