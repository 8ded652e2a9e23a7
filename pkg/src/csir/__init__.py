"""Code-switched training data generation and evaluation for cross-lingual
passage reranking: lexicon induction from aligned embeddings, three
code-switching strategies plus term-by-term translation, mixed-language
test-collection construction, MRR@k / overlap / significance evaluation,
and a desk-scale ranker for the monolingual-overfitting experiment.
"""

from .codeswitch import (
    CodeSwitcher,
    SwitchOutcome,
    SwitchPolicy,
    SwitchRng,
    SwitchStats,
    Token,
    switch_bilingual,
    switch_multilingual,
    switch_wiki,
    tokenize,
    translate_test,
)
from .corpus import (
    Qrels,
    Run,
    RunEntry,
    Triple,
    TripleSet,
    mix_language_corpus,
    transform_triples,
)
from .embeddings import (
    EmbeddingSpace,
    NeighborResult,
    cosine,
    induce_lexicon,
    load_embeddings,
    nearest_neighbors,
)
from .ireval import (
    MetricReport,
    OverlapBuckets,
    SignificanceResult,
    bucket_queries,
    mrr_at_k,
    overlap_reduction,
    paired_t_test,
    token_overlap,
)
from .lexicon import BilingualLexicon, NGramLexicon, lexicon_stats, parse_wiki_titles
from .toyrank import (
    ExperimentConfig,
    FeatureVector,
    ToyRanker,
    TrainConfig,
    featurize,
    rerank,
    run_overfitting_experiment,
    train,
)

__version__ = "0.1.0"
