"""A desk-scale linear relevance scorer over lexical features.

The ranker scores a query/document pair from five features: exact lexical
overlap, lexicon-mediated overlap (a query token whose translation appears
in the document), query length, document length, and a bias. Exact matching
is the strong monolingual relevance signal; the lexicon feature is the
cross-lingual counterpart. Training a ranker on monolingual pairs gives the
exact-match feature all the signal, which is precisely the overfitting that
code-switched training data counteracts -- the bundled synthetic experiment
makes that effect measurable in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .codeswitch import CodeSwitcher, SwitchPolicy
from .corpus import RunEntry, Triple, switch_triple
from .ireval import mrr_at_k
from .lexicon import BilingualLexicon
from .tokenizer import word_tokens, word_types
from .util import format_kv_block

FEATURE_NAMES = ("exact_match", "lexicon_match", "query_length", "doc_length", "bias")


@dataclass(frozen=True)
class FeatureVector:
    exact_match: float
    lexicon_match: float
    query_length: float
    doc_length: float
    bias: float = 1.0

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.exact_match, self.lexicon_match, self.query_length, self.doc_length, self.bias],
            dtype=np.float64,
        )


def featurize(
    query: str, doc: str, lexicons: Iterable[BilingualLexicon] | Mapping[str, BilingualLexicon]
) -> FeatureVector:
    """Deterministic lexical features for one query/document pair.

    lexicon_match counts query types with no exact match whose translation's
    word tokens all occur in the document.
    """
    if isinstance(lexicons, Mapping):
        lexicons = list(lexicons.values())
    query_words = word_tokens(query)
    query_types = {w.casefold() for w in query_words}
    doc_words = word_tokens(doc)
    doc_types = {w.casefold() for w in doc_words}
    exact = len(query_types & doc_types)
    lexicon_hits = 0
    for qtype in query_types - doc_types:
        for lexicon in lexicons:
            translation = lexicon.lookup(qtype)
            if translation is None:
                continue
            translated_types = word_types(translation)
            if translated_types and translated_types <= doc_types:
                lexicon_hits += 1
                break
    return FeatureVector(
        exact_match=float(exact),
        lexicon_match=float(lexicon_hits),
        query_length=float(len(query_words)),
        doc_length=float(len(doc_words)),
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    exp_z = np.exp(z[~pos])
    out[~pos] = exp_z / (1.0 + exp_z)
    return out


def logistic_loss(weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-likelihood of labels under the linear-sigmoid model."""
    z = features @ weights
    # log(1 + exp(-z)) computed stably for both signs of z
    loss = np.logaddexp(0.0, -z) * labels + np.logaddexp(0.0, z) * (1.0 - labels)
    return float(np.mean(loss))


def logistic_gradient(weights: np.ndarray, features: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Analytic gradient of logistic_loss with respect to the weights."""
    residual = _sigmoid(features @ weights) - labels
    return features.T @ residual / len(labels)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.2
    epochs: int = 400
    seed: int = 0
    neg_ratio: int = 4  # negatives per positive


@dataclass
class ToyRanker:
    """Linear scorer; scoring is a pure function of weights and features."""

    weights: np.ndarray
    config: TrainConfig = field(default_factory=TrainConfig)

    def score(self, features: FeatureVector) -> float:
        return float(features.as_array() @ self.weights)

    def probability(self, features: FeatureVector) -> float:
        return float(_sigmoid(np.array([features.as_array() @ self.weights]))[0])

    def weight(self, name: str) -> float:
        return float(self.weights[FEATURE_NAMES.index(name)])

    def save(self, path) -> None:
        values = {name: repr(float(w)) for name, w in zip(FEATURE_NAMES, self.weights)}
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(format_kv_block(values))

    @classmethod
    def load(cls, path) -> "ToyRanker":
        values: dict[str, float] = {}
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, value = line.partition("=")
                values[key] = float(value)
        weights = np.array([values[name] for name in FEATURE_NAMES], dtype=np.float64)
        return cls(weights=weights)


def build_training_matrix(
    triples: Sequence[Triple],
    lexicons: Iterable[BilingualLexicon] | Mapping[str, BilingualLexicon],
    config: TrainConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Featurized pairs with positives labeled 1 and negatives 0.

    Each triple contributes its positive, its own negative, and
    (neg_ratio - 1) extra negatives drawn from other triples, all seeded.
    """
    if not triples:
        raise ValueError("empty triple set")
    if config.neg_ratio < 1:
        raise ValueError("neg_ratio must be >= 1")
    if isinstance(lexicons, Mapping):
        lexicons = list(lexicons.values())
    rng = np.random.default_rng(config.seed)
    rows: list[np.ndarray] = []
    labels: list[float] = []
    for i, triple in enumerate(triples):
        rows.append(featurize(triple.query, triple.pos, lexicons).as_array())
        labels.append(1.0)
        negatives = [triple.neg]
        if len(triples) > 1:
            while len(negatives) < config.neg_ratio:
                j = int(rng.integers(len(triples)))
                if j != i:
                    negatives.append(triples[j].neg)
        for neg in negatives:
            rows.append(featurize(triple.query, neg, lexicons).as_array())
            labels.append(0.0)
    return np.vstack(rows), np.asarray(labels, dtype=np.float64)


def train(
    triples: Sequence[Triple],
    lexicons: Iterable[BilingualLexicon] | Mapping[str, BilingualLexicon],
    config: TrainConfig | None = None,
) -> ToyRanker:
    """Fit the scorer by full-batch gradient descent on the logistic loss.

    Single-threaded and seeded throughout: same data and config give
    bit-identical weights.
    """
    config = config or TrainConfig()
    features, labels = build_training_matrix(triples, lexicons, config)
    weights = np.zeros(len(FEATURE_NAMES), dtype=np.float64)
    for _ in range(config.epochs):
        weights = weights - config.learning_rate * logistic_gradient(weights, features, labels)
    return ToyRanker(weights=weights, config=config)


def rerank(
    ranker: ToyRanker,
    query: str,
    candidates: Mapping[str, str],
    lexicons: Iterable[BilingualLexicon] | Mapping[str, BilingualLexicon],
) -> list[RunEntry]:
    """Score candidates and rank them descending, ties broken by doc id."""
    if not candidates:
        raise ValueError("empty candidate set")
    if isinstance(lexicons, Mapping):
        lexicons = list(lexicons.values())
    scored = [
        (ranker.score(featurize(query, text, lexicons)), doc_id)
        for doc_id, text in candidates.items()
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [RunEntry(doc_id, rank, score) for rank, (score, doc_id) in enumerate(scored, start=1)]


@dataclass(frozen=True)
class ExperimentConfig:
    """Synthetic bilingual retrieval world for the overfitting experiment.

    A shared concept-id space is rendered into two surface vocabularies
    ("a<id>" and "b<id>") with a perfect concept-level lexicon between them,
    which removes lexicon noise as a confound. Concepts are grouped into
    topics; a query and its relevant document draw from one topic, negatives
    from others.
    """

    vocab_size: int = 500
    n_topics: int = 50
    query_len: int = 4
    doc_len: int = 12
    n_train: int = 600
    n_test: int = 200
    n_candidates: int = 10
    p: float = 0.5
    seed: int = 7
    train: TrainConfig = field(default_factory=TrainConfig)


@dataclass
class TestInstance:
    query: str
    candidates: dict[str, str]
    relevant_id: str


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    mrr: dict[str, dict[str, float]]  # ranker -> test set -> MRR@10
    weights: dict[str, dict[str, float]]  # ranker -> feature -> weight

    def as_kv(self) -> dict[str, object]:
        values: dict[str, object] = {
            "seed": self.config.seed,
            "p": self.config.p,
            "train_triples": self.config.n_train,
            "test_queries": self.config.n_test,
            "candidates": self.config.n_candidates,
        }
        for ranker in sorted(self.mrr):
            for test_set in sorted(self.mrr[ranker]):
                values[f"mrr10_{ranker}_{test_set}"] = f"{self.mrr[ranker][test_set]:.6f}"
        for ranker in sorted(self.weights):
            for name in FEATURE_NAMES:
                values[f"weight_{ranker}_{name}"] = f"{self.weights[ranker][name]:.6f}"
        return values

    def to_text(self) -> str:
        lines = ["monolingual vs code-switched training, synthetic bilingual corpus", ""]
        lines.append(f"{'ranker':<14}{'moir':>8}{'clir':>8}")
        for ranker in sorted(self.mrr):
            row = self.mrr[ranker]
            lines.append(f"{ranker:<14}{row['moir']:>8.4f}{row['clir']:>8.4f}")
        lines.append("")
        lines.append(f"{'feature':<16}" + "".join(f"{r:>14}" for r in sorted(self.weights)))
        for name in FEATURE_NAMES:
            lines.append(
                f"{name:<16}"
                + "".join(f"{self.weights[r][name]:>14.4f}" for r in sorted(self.weights))
            )
        return "\n".join(lines) + "\n"


def _concept_pools(config: ExperimentConfig) -> list[list[int]]:
    if config.n_topics < 2:
        raise ValueError("need at least two topics to draw negatives")
    topic_size = config.vocab_size // config.n_topics
    if topic_size < config.query_len:
        raise ValueError("topics too small for the query length")
    return [
        list(range(t * topic_size, (t + 1) * topic_size)) for t in range(config.n_topics)
    ]


def _render(concepts: Iterable[int], lang: str) -> str:
    return " ".join(f"{lang}{c}" for c in concepts)


def _sample_instance(rng: np.random.Generator, pools, config: ExperimentConfig):
    topic = int(rng.integers(len(pools)))
    query = rng.choice(pools[topic], size=config.query_len, replace=False)
    pos = rng.choice(pools[topic], size=config.doc_len, replace=True)
    other = int(rng.integers(len(pools) - 1))
    other = other if other < topic else other + 1
    neg = rng.choice(pools[other], size=config.doc_len, replace=True)
    return topic, list(query), list(pos), list(neg)


def _neg_doc(rng: np.random.Generator, pools, exclude: int, config: ExperimentConfig):
    other = int(rng.integers(len(pools) - 1))
    other = other if other < exclude else other + 1
    return list(rng.choice(pools[other], size=config.doc_len, replace=True))


def build_synthetic_world(config: ExperimentConfig):
    """Training triples (language 'a'), test instances, and the concept lexicons."""
    pools = _concept_pools(config)
    rng = np.random.default_rng(config.seed)
    lexicons = {
        "a": BilingualLexicon(
            src_lang="b",
            tgt_lang="a",
            entries={f"b{c}": f"a{c}" for c in range(config.vocab_size)},
        ),
        "b": BilingualLexicon(
            src_lang="a",
            tgt_lang="b",
            entries={f"a{c}": f"b{c}" for c in range(config.vocab_size)},
        ),
    }
    train_triples = []
    for _ in range(config.n_train):
        _, query, pos, neg = _sample_instance(rng, pools, config)
        train_triples.append(Triple(_render(query, "a"), _render(pos, "a"), _render(neg, "a")))

    def test_instances(query_lang: str, doc_lang: str) -> list[TestInstance]:
        instances = []
        for i in range(config.n_test):
            topic, query, pos, _ = _sample_instance(rng, pools, config)
            slot = int(rng.integers(config.n_candidates))
            candidates: dict[str, str] = {}
            for j in range(config.n_candidates):
                doc_id = f"q{i}_c{j}"
                concepts = pos if j == slot else _neg_doc(rng, pools, topic, config)
                candidates[doc_id] = _render(concepts, doc_lang)
            instances.append(
                TestInstance(
                    query=_render(query, query_lang),
                    candidates=candidates,
                    relevant_id=f"q{i}_c{slot}",
                )
            )
        return instances

    # MoIR: both sides in the transfer language; CLIR: query stays source-side.
    tests = {"moir": test_instances("b", "b"), "clir": test_instances("a", "b")}
    return train_triples, tests, lexicons


def evaluate_ranker(
    ranker: ToyRanker,
    instances: Sequence[TestInstance],
    lexicons: Mapping[str, BilingualLexicon],
    k: int = 10,
) -> float:
    run = {}
    qrels = {}
    for i, instance in enumerate(instances):
        qid = f"q{i}"
        run[qid] = rerank(ranker, instance.query, instance.candidates, lexicons)
        qrels[qid] = {instance.relevant_id: 1}
    return mrr_at_k(run, qrels, k=k).mrr


def run_overfitting_experiment(config: ExperimentConfig | None = None) -> ExperimentReport:
    """Train one ranker on monolingual triples and one on code-switched
    triples, then compare them on same-language and cross-language test sets.
    """
    config = config or ExperimentConfig()
    train_triples, tests, lexicons = build_synthetic_world(config)
    policy = SwitchPolicy(
        strategy="ml", p=config.p, query_langs=("b",), doc_langs=("b",), seed=config.seed
    )
    switcher = CodeSwitcher(policy, {"b": lexicons["b"]})
    switched = [switch_triple(triple, switcher)[0] for triple in train_triples]
    train_config = replace(config.train, seed=config.seed)
    ranker_mono = train(train_triples, lexicons, train_config)
    ranker_cs = train(switched, lexicons, train_config)
    mrr = {
        "monolingual": {
            name: evaluate_ranker(ranker_mono, instances, lexicons)
            for name, instances in tests.items()
        },
        "codeswitched": {
            name: evaluate_ranker(ranker_cs, instances, lexicons)
            for name, instances in tests.items()
        },
    }
    weights = {
        "monolingual": dict(zip(FEATURE_NAMES, map(float, ranker_mono.weights))),
        "codeswitched": dict(zip(FEATURE_NAMES, map(float, ranker_cs.weights))),
    }
    return ExperimentReport(config=config, mrr=mrr, weights=weights)
