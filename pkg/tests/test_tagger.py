import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fd_grad, max_rel_err
from graphkpe.embeddings import HashedProvider
from graphkpe.tagger import (
    CLASS_INDEX,
    DocFeatures,
    TaggerHyper,
    TaggerModel,
    TagPrediction,
    chunk_sequence,
    gradcheck_tagger,
    init_tagger,
    load_tagger,
    predict_document,
    save_tagger,
    tag_forward,
    train_tagger,
    _loss_and_grads,
)

from synth_data import make_identity_separable_corpus
from graphkpe.corpus import derive_bio_labels


def zero_model(d_g=2, d_c=2, p=2):
    return TaggerModel(
        P_g=np.zeros((p, d_g)), b_g=np.zeros(p),
        P_c=np.zeros((p, d_c)), b_c=np.zeros(p),
        C=np.zeros((3, 2 * p)), b_out=np.zeros(3),
    )


class TestTagForward:
    def test_all_zero_gives_uniform(self):
        pred = tag_forward(zero_model(), np.zeros((4, 2)), np.zeros((4, 2)))
        assert np.allclose(pred.probs, 1 / 3)

    def test_bias_saturation(self):
        model = zero_model()
        model.b_out[0] = 10.0
        pred = tag_forward(model, np.zeros((1, 2)), np.zeros((1, 2)))
        assert pred.probs[0, 0] > 0.9999
        assert pred.labels == ("B",)

    def test_two_token_hand_fixture(self):
        model = TaggerModel(
            P_g=np.array([[1.0, 0.0], [0.0, -1.0]]),
            b_g=np.array([0.1, 0.2]),
            P_c=np.array([[0.5, 0.5], [-0.5, 0.5]]),
            b_c=np.array([0.0, -0.1]),
            C=np.array([
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 1.0],
            ]),
            b_out=np.array([0.0, 0.1, -0.1]),
        )
        z = np.array([[1.0, 1.0], [0.0, -1.0]])
        h = np.array([[2.0, 0.0], [0.0, 0.0]])
        pred = tag_forward(model, z, h)

        # token 1 by scalar arithmetic: a_g = (relu(1.1), relu(-0.8)),
        # a_c = (relu(1.0), relu(-1.1)), logits = (1.1, 0.1, 0.9)
        e = (math.exp(1.1), math.exp(0.1), math.exp(0.9))
        s = sum(e)
        assert np.allclose(pred.probs[0], [v / s for v in e], atol=1e-6)
        # token 2: a_g = (0.1, 1.2), a_c = (0, 0), logits = (0.1, 1.3, -0.1)
        e = (math.exp(0.1), math.exp(1.3), math.exp(-0.1))
        s = sum(e)
        assert np.allclose(pred.probs[1], [v / s for v in e], atol=1e-6)

    def test_rows_sum_to_one(self, rng):
        model = init_tagger(4, 6, 5, seed=1)
        pred = tag_forward(model, rng.standard_normal((10, 4)), rng.standard_normal((10, 6)))
        assert np.allclose(pred.probs.sum(axis=1), 1.0, atol=1e-6)
        assert np.all(pred.probs >= 0)

    def test_logit_shift_invariance(self, rng):
        model = init_tagger(3, 3, 4, seed=2)
        shifted = model.copy()
        shifted.b_out += 7.5
        z = rng.standard_normal((6, 3))
        h = rng.standard_normal((6, 3))
        a = tag_forward(model, z, h)
        b = tag_forward(shifted, z, h)
        assert np.allclose(a.probs, b.probs, atol=1e-10)
        assert a.labels == b.labels

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            tag_forward(zero_model(), np.zeros((2, 2)), np.zeros((3, 2)))


class TestChunking:
    def test_short_input_single_span(self):
        assert chunk_sequence(5, 512) == [(0, 5)]

    def test_exact_multiple(self):
        assert chunk_sequence(1024, 512) == [(0, 512), (512, 1024)]

    def test_remainder_span(self):
        assert chunk_sequence(1025, 512) == [(0, 512), (512, 1024), (1024, 1025)]

    def test_bad_limit(self):
        with pytest.raises(ValueError):
            chunk_sequence(10, 0)

    @given(n=st.integers(min_value=0, max_value=5000), limit=st.integers(min_value=1, max_value=700))
    @settings(max_examples=200, deadline=None)
    def test_spans_partition_range(self, n, limit):
        spans = chunk_sequence(n, limit)
        assert all(s < e for s, e in spans)
        assert all(spans[i][1] == spans[i + 1][0] for i in range(len(spans) - 1))
        if n == 0:
            assert spans == []
        else:
            assert spans[0][0] == 0 and spans[-1][1] == n
        assert sum(e - s for s, e in spans) == n

    def test_chunked_prediction_matches_unchunked(self, rng):
        model = init_tagger(3, 4, 5, seed=3)
        z = rng.standard_normal((23, 3))
        h = rng.standard_normal((23, 4))
        full = tag_forward(model, z, h)
        chunked = predict_document(model, z, h, limit=7)
        assert chunked.probs.shape[0] == 23
        assert np.allclose(chunked.probs, full.probs)
        assert chunked.labels == full.labels


class TestGradients:
    def test_gradcheck_below_tolerance(self, rng):
        model = init_tagger(4, 5, 3, seed=7)
        z = rng.standard_normal((3, 4))
        h = rng.standard_normal((3, 5))
        y = np.array([0, 2, 1])
        assert gradcheck_tagger(model, z, h, y) < 1e-4

    def test_zero_classifier_blocks_projection_grads(self, rng):
        model = init_tagger(3, 3, 4, seed=8)
        model.C[...] = 0.0
        z = rng.standard_normal((2, 3))
        h = rng.standard_normal((2, 3))
        _, grads = _loss_and_grads(model, z, h, np.array([0, 1]))
        assert np.allclose(grads["P_g"], 0.0)
        assert np.allclose(grads["P_c"], 0.0)
        assert np.allclose(grads["b_g"], 0.0)
        assert np.allclose(grads["b_c"], 0.0)

    def test_doubled_loss_doubles_gradients(self, rng):
        model = init_tagger(3, 3, 2, seed=9)
        z = rng.standard_normal((3, 3))
        h = rng.standard_normal((3, 3))
        y = np.array([0, 1, 2])
        _, grads = _loss_and_grads(model, z, h, y)

        def doubled():
            loss, _ = _loss_and_grads(model, z, h, y)
            return 2.0 * loss

        fd = fd_grad(doubled, model.C)
        assert max_rel_err(2.0 * grads["C"], fd) < 1e-4


def make_bundles(docs, provider, zeros_dim=4):
    bundles = []
    for doc in docs:
        labeled = derive_bio_labels(doc)
        y = np.array([CLASS_INDEX[lab] for lab in labeled.labels])
        h = np.stack([provider.vector(t) for t in doc.tokens])
        z = np.zeros((len(doc.tokens), zeros_dim))
        bundles.append(DocFeatures(doc.id, z, h, y))
    return bundles


class TestTraining:
    def test_zero_lr_is_identity(self):
        docs = make_identity_separable_corpus(4, seed=1)
        provider = HashedProvider(d_c=16, seed=0)
        bundles = make_bundles(docs, provider)
        model = init_tagger(4, 16, 8, seed=0)
        before = model.copy()
        hyper = TaggerHyper(epochs=3, lr=0.0, batch=2)
        trained, log = train_tagger(model, bundles[:3], bundles[3:], hyper, seed=0)
        for name, value in trained.params().items():
            assert np.array_equal(value, before.params()[name])
        vals = [e["val_loss"] for e in log]
        assert all(v == vals[0] for v in vals)

    def test_identical_seeds_identical_logs(self):
        docs = make_identity_separable_corpus(6, seed=2)
        provider = HashedProvider(d_c=12, seed=0)
        logs = []
        for _ in range(2):
            bundles = make_bundles(docs, provider)
            model = init_tagger(4, 12, 8, seed=3)
            hyper = TaggerHyper(epochs=5, lr=1e-3, batch=2)
            _, log = train_tagger(model, bundles[:4], bundles[4:], hyper, seed=11)
            logs.append(log)
        assert logs[0] == logs[1]

    def test_annealing_fires_on_plateau(self):
        # zero inputs + balanced labels give exactly zero gradients, so
        # validation loss plateaus and the lr anneals every `patience`
        bundle = DocFeatures("d", np.zeros((3, 2)), np.zeros((3, 2)), np.array([0, 1, 2]))
        model = zero_model()
        hyper = TaggerHyper(epochs=5, lr=0.5, batch=1, patience=2, anneal=0.5)
        _, log = train_tagger(model, [bundle], [bundle], hyper, seed=0)
        assert [e["lr"] for e in log] == [0.5, 0.5, 0.5, 0.25, 0.25]

    def test_separable_corpus_reaches_high_token_accuracy(self):
        docs = make_identity_separable_corpus(10, seed=5)
        provider = HashedProvider(d_c=24, seed=2)
        bundles = make_bundles(docs, provider)
        model = init_tagger(4, 24, 24, seed=1)
        hyper = TaggerHyper(epochs=100, lr=0.02, batch=10)
        model, _ = train_tagger(model, bundles, bundles[:2], hyper, seed=0)
        correct = 0
        total = 0
        for b in bundles:
            pred = tag_forward(model, b.z, b.h)
            correct += int(np.sum(np.argmax(pred.probs, axis=1) == b.y))
            total += len(b.y)
        assert correct / total > 0.95

    def test_unlabeled_document_is_error(self):
        bundle = DocFeatures("d", np.zeros((2, 2)), np.zeros((2, 2)), None)
        with pytest.raises(ValueError, match="labels"):
            train_tagger(zero_model(), [bundle], [], TaggerHyper(epochs=1), seed=0)

    def test_no_graph_predictions_ignore_graph_input(self, rng):
        docs = make_identity_separable_corpus(6, seed=7)
        provider = HashedProvider(d_c=12, seed=1)
        bundles = make_bundles(docs, provider)
        model = init_tagger(4, 12, 6, seed=2)
        hyper = TaggerHyper(epochs=5, lr=1e-2, batch=3)
        model, _ = train_tagger(model, bundles[:4], bundles[4:], hyper, seed=0, no_graph=True)
        assert np.allclose(model.P_g, 0.0)
        assert np.allclose(model.b_g, 0.0)
        h = rng.standard_normal((5, 12))
        a = tag_forward(model, rng.standard_normal((5, 4)), h)
        b = tag_forward(model, np.zeros((5, 4)), h)
        assert np.allclose(a.probs, b.probs)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        model = init_tagger(5, 7, 4, seed=13)
        path = tmp_path / "t.ckpt"
        save_tagger(model, path)
        loaded = load_tagger(path)
        assert loaded.d_g == 5 and loaded.d_c == 7 and loaded.p == 4
        for name, value in model.params().items():
            assert np.array_equal(
                loaded.params()[name], value.astype("<f4").astype(np.float64)
            )

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "t.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            load_tagger(path)


class TestTagPrediction:
    def test_from_labels_one_hot(self):
        pred = TagPrediction.from_labels(["B", "I", "O"])
        assert np.array_equal(pred.probs, np.eye(3))
        assert pred.labels == ("B", "I", "O")
