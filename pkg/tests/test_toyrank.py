"""Toy ranker feature, training, reranking, and experiment tests."""

import numpy as np
import pytest

from csir.corpus import Triple
from csir.lexicon import BilingualLexicon
from csir.toyrank import (
    FEATURE_NAMES,
    ExperimentConfig,
    ToyRanker,
    TrainConfig,
    build_training_matrix,
    featurize,
    logistic_gradient,
    logistic_loss,
    rerank,
    run_overfitting_experiment,
    train,
)


class TestFeaturize:
    def test_identical_texts_empty_lexicon(self):
        fv = featurize("red green blue", "red green blue", [])
        assert fv.exact_match == 3
        assert fv.lexicon_match == 0
        assert fv.query_length == 3
        assert fv.doc_length == 3

    def test_disjoint_texts_full_lexicon(self):
        lex = BilingualLexicon("en", "de", {"red": "rot", "green": "gruen"})
        fv = featurize("red green", "rot gruen", [lex])
        assert fv.exact_match == 0
        assert fv.lexicon_match == 2

    def test_exact_matches_excluded_from_lexicon_count(self):
        lex = BilingualLexicon("en", "de", {"red": "rot", "shared": "shared"})
        fv = featurize("red shared", "rot shared", [lex])
        assert fv.exact_match == 1  # "shared"
        assert fv.lexicon_match == 1  # "red" -> "rot"

    def test_hand_enumerated_mixed_fixture(self):
        # query types: common, red, blue, extra
        # doc types:   common, rot, blau, other
        # exact: common; lexicon: red->rot, blue->blau; extra: nothing
        lex = BilingualLexicon("en", "de", {"red": "rot", "blue": "blau", "extra": "missing"})
        fv = featurize("common red blue extra", "common rot blau other", [lex])
        assert fv.exact_match == 1
        assert fv.lexicon_match == 2
        assert fv.query_length == 4
        assert fv.doc_length == 4

    def test_case_folding(self):
        fv = featurize("Red RED red", "red", [])
        assert fv.exact_match == 1
        assert fv.query_length == 3

    def test_multiword_translation_requires_all_tokens(self):
        lex = BilingualLexicon("en", "it", {"creditcard": "carta di credito"})
        hit = featurize("creditcard", "la carta di credito", [lex])
        assert hit.lexicon_match == 1
        partial = featurize("creditcard", "carta di altro", [lex])
        assert partial.lexicon_match == 0


class TestTraining:
    def separable_triples(self, n=40):
        # positives share tokens with the query, negatives never do
        triples = []
        for i in range(n):
            query = f"a{i} b{i}"
            triples.append(Triple(query, f"a{i} b{i} c{i}", f"x{i} y{i} z{i}"))
        return triples

    def test_zero_epochs_outputs_half(self):
        ranker = train(
            self.separable_triples(4), [], TrainConfig(epochs=0, seed=0, neg_ratio=1)
        )
        assert np.all(ranker.weights == 0.0)
        fv = featurize("any query", "any doc", [])
        assert ranker.probability(fv) == 0.5

    def test_separable_set_reaches_perfect_accuracy(self):
        triples = self.separable_triples()
        config = TrainConfig(epochs=600, learning_rate=0.3, seed=1)
        ranker = train(triples, [], config)
        features, labels = build_training_matrix(triples, [], config)
        predictions = (features @ ranker.weights) > 0
        assert np.mean(predictions == (labels == 1.0)) == 1.0

    def test_training_deterministic(self):
        triples = self.separable_triples(10)
        config = TrainConfig(epochs=50, seed=3)
        a = train(triples, [], config)
        b = train(triples, [], config)
        assert np.array_equal(a.weights, b.weights)

    def test_empty_triples_rejected(self):
        with pytest.raises(ValueError):
            train([], [], TrainConfig())

    def test_neg_ratio_shapes_matrix(self):
        triples = self.separable_triples(10)
        features, labels = build_training_matrix(triples, [], TrainConfig(neg_ratio=4, seed=0))
        assert features.shape == (10 * 5, len(FEATURE_NAMES))
        assert labels.sum() == 10

    def test_gradient_matches_central_differences(self):
        rng = np.random.default_rng(12)
        step = 1e-5
        worst = 0.0
        for _ in range(100):
            n = int(rng.integers(4, 20))
            features = rng.normal(scale=2.0, size=(n, len(FEATURE_NAMES)))
            labels = rng.integers(0, 2, size=n).astype(np.float64)
            weights = rng.normal(size=len(FEATURE_NAMES))
            analytic = logistic_gradient(weights, features, labels)
            for j in range(len(FEATURE_NAMES)):
                bump = np.zeros_like(weights)
                bump[j] = step
                numeric = (
                    logistic_loss(weights + bump, features, labels)
                    - logistic_loss(weights - bump, features, labels)
                ) / (2 * step)
                worst = max(worst, abs(numeric - analytic[j]))
        assert worst < 1e-6


class TestRerank:
    def ranker(self, exact=1.0, lexicon=0.0):
        weights = np.zeros(len(FEATURE_NAMES))
        weights[FEATURE_NAMES.index("exact_match")] = exact
        weights[FEATURE_NAMES.index("lexicon_match")] = lexicon
        return ToyRanker(weights=weights)

    def test_single_candidate(self):
        entries = rerank(self.ranker(), "q", {"d1": "text"}, [])
        assert entries[0].rank == 1
        assert entries[0].doc_id == "d1"

    def test_equal_scores_tie_break_by_doc_id(self):
        entries = rerank(self.ranker(), "query", {"b": "same", "a": "same"}, [])
        assert [e.doc_id for e in entries] == ["a", "b"]

    def test_high_overlap_doc_wins(self):
        candidates = {
            "match": "alpha beta gamma filler",
            "miss": "delta epsilon zeta filler",
        }
        entries = rerank(self.ranker(), "alpha beta gamma", candidates, [])
        assert entries[0].doc_id == "match"

    def test_ordering_invariant_under_affine_weights(self):
        candidates = {f"d{i}": f" ".join(f"t{j}" for j in range(i)) or "empty" for i in range(1, 6)}
        base = rerank(self.ranker(exact=1.0), "t0 t1 t2", candidates, [])
        scaled = rerank(self.ranker(exact=3.5), "t0 t1 t2", candidates, [])
        assert [e.doc_id for e in base] == [e.doc_id for e in scaled]

    def test_empty_candidates_rejected(self):
        with pytest.raises(ValueError):
            rerank(self.ranker(), "q", {}, [])


class TestWeightsFile:
    def test_roundtrip(self, tmp_path):
        weights = np.array([1.5, -0.25, 0.0, 0.125, 2.0])
        path = tmp_path / "ranker.weights"
        ToyRanker(weights=weights).save(path)
        loaded = ToyRanker.load(path)
        assert np.array_equal(loaded.weights, weights)


@pytest.fixture(scope="module")
def report():
    config = ExperimentConfig(
        vocab_size=200,
        n_topics=20,
        n_train=200,
        n_test=80,
        seed=7,
        train=TrainConfig(epochs=200, learning_rate=0.2, seed=7),
    )
    return run_overfitting_experiment(config)


class TestExperiment:
    def test_monolingual_ranker_drops_on_clir(self, report):
        mono = report.mrr["monolingual"]
        assert mono["clir"] < mono["moir"]

    def test_codeswitched_lexicon_weight_exceeds_monolingual(self, report):
        assert (
            report.weights["codeswitched"]["lexicon_match"]
            > report.weights["monolingual"]["lexicon_match"]
        )

    def test_codeswitched_beats_monolingual_on_clir(self, report):
        assert report.mrr["codeswitched"]["clir"] > report.mrr["monolingual"]["clir"]

    def test_report_render(self, report):
        text = report.to_text()
        assert "clir" in text
        kv = report.as_kv()
        assert "mrr10_monolingual_clir" in kv
        assert "weight_codeswitched_lexicon_match" in kv
