"""Reranker evaluation: MRR@k, query/document token-overlap analysis, and
paired significance testing.

Overlap analysis uses the toolkit's word tokenizer, not any model's subword
tokenizer; bucket semantics are preserved but absolute token counts are not
comparable across tokenizers. Report headers flag this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from scipy.special import betainc

from .corpus import Qrels, Run, Triple
from .tokenizer import word_tokens, word_types
from .util import format_kv_block, format_table

TOKENIZER_NOTE = "token overlap computed with the toolkit word tokenizer"

BUCKET_NONE = "none"
BUCKET_SOME = "some"
BUCKET_SIGNIFICANT = "significant"
BUCKETS = (BUCKET_NONE, BUCKET_SOME, BUCKET_SIGNIFICANT)


@dataclass
class MetricReport:
    """Per-query reciprocal ranks plus their mean."""

    k: int
    per_query: dict[str, float]
    mrr: float = field(init=False)

    def __post_init__(self):
        self.mrr = (
            sum(self.per_query.values()) / len(self.per_query) if self.per_query else 0.0
        )

    @property
    def query_count(self) -> int:
        return len(self.per_query)

    def as_kv(self, prefix: str = "") -> dict[str, object]:
        return {
            f"{prefix}k": self.k,
            f"{prefix}queries": self.query_count,
            f"{prefix}mrr": f"{self.mrr:.6f}",
        }


def mrr_at_k(run: Run, qrels: Qrels, k: int = 10) -> MetricReport:
    """Mean reciprocal rank of the first relevant document within the top k.

    Queries judged in qrels but absent from the run score 0; run queries
    without judgments are excluded.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not qrels:
        raise ValueError("empty qrels")
    per_query: dict[str, float] = {}
    for qid in sorted(qrels):
        relevant = {doc for doc, grade in qrels[qid].items() if grade > 0}
        rr = 0.0
        for entry in run.get(qid, []):
            if entry.rank > k:
                break
            if entry.doc_id in relevant:
                rr = 1.0 / entry.rank
                break
        per_query[qid] = rr
    return MetricReport(k=k, per_query=per_query)


def token_overlap(query_tokens: Iterable[str], doc_tokens: Iterable[str]) -> int:
    """Number of distinct query token types also present in the document."""
    return len(set(query_tokens) & set(doc_tokens))


def occurrence_overlap(query_text: str, doc_text: str) -> int:
    """Query token occurrences (not types) whose type appears in the document."""
    doc = word_types(doc_text)
    return sum(1 for token in word_tokens(query_text) if token.casefold() in doc)


def bucket_for(overlap: float) -> str:
    """none: 0 shared tokens; some: up to three; significant: more than three."""
    if overlap == 0:
        return BUCKET_NONE
    if overlap <= 3:
        return BUCKET_SOME
    return BUCKET_SIGNIFICANT


@dataclass
class OverlapBuckets:
    """Per-query mean overlap with relevant documents, bucketed, with per-bucket MRR."""

    k: int
    overlap: dict[str, float]
    bucket: dict[str, str]
    bucket_count: dict[str, int]
    bucket_mrr: dict[str, float]
    mrr_all: float

    def as_kv(self) -> dict[str, object]:
        values: dict[str, object] = {"k": self.k, "queries": len(self.overlap)}
        for name in BUCKETS:
            values[f"count_{name}"] = self.bucket_count[name]
            values[f"mrr_{name}"] = f"{self.bucket_mrr[name]:.6f}"
        values["mrr_all"] = f"{self.mrr_all:.6f}"
        return values

    def to_text(self) -> str:
        rows = [
            (name, self.bucket_count[name], f"{self.bucket_mrr[name]:.4f}")
            for name in BUCKETS
        ]
        rows.append(("all", len(self.overlap), f"{self.mrr_all:.4f}"))
        header = ["bucket", "queries", f"mrr@{self.k}"]
        return f"# {TOKENIZER_NOTE}\n" + format_table(rows, header)


def bucket_queries(
    queries: Mapping[str, str],
    collection: Mapping[str, str],
    qrels: Qrels,
    run: Run,
    k: int = 10,
) -> OverlapBuckets:
    """Group judged queries by mean token overlap with their relevant documents."""
    metric = mrr_at_k(run, qrels, k=k)
    overlap: dict[str, float] = {}
    bucket: dict[str, str] = {}
    for qid in sorted(qrels):
        if qid not in queries:
            raise KeyError(f"query {qid!r} judged in qrels but missing from the query set")
        relevant = [doc for doc, grade in qrels[qid].items() if grade > 0]
        query_types = word_types(queries[qid])
        overlaps = []
        for doc_id in relevant:
            if doc_id not in collection:
                raise KeyError(f"relevant document {doc_id!r} missing from the collection")
            overlaps.append(token_overlap(query_types, word_types(collection[doc_id])))
        mean = sum(overlaps) / len(overlaps) if overlaps else 0.0
        overlap[qid] = mean
        bucket[qid] = bucket_for(mean)
    bucket_count = {name: 0 for name in BUCKETS}
    bucket_sum = {name: 0.0 for name in BUCKETS}
    for qid, name in bucket.items():
        bucket_count[name] += 1
        bucket_sum[name] += metric.per_query[qid]
    bucket_mrr = {
        name: (bucket_sum[name] / bucket_count[name] if bucket_count[name] else 0.0)
        for name in BUCKETS
    }
    return OverlapBuckets(
        k=k,
        overlap=overlap,
        bucket=bucket,
        bucket_count=bucket_count,
        bucket_mrr=bucket_mrr,
        mrr_all=metric.mrr,
    )


@dataclass
class OverlapReduction:
    tokens_before: int
    tokens_after: int

    @property
    def reduction(self) -> float:
        if self.tokens_before == 0:
            return 0.0
        return 1.0 - self.tokens_after / self.tokens_before

    def as_kv(self) -> dict[str, object]:
        return {
            "overlap_tokens_before": self.tokens_before,
            "overlap_tokens_after": self.tokens_after,
            "overlap_reduction": f"{self.reduction:.6f}",
        }


def overlap_reduction(
    triples_before: Sequence[Triple], triples_after: Sequence[Triple]
) -> OverlapReduction:
    """Sum query/positive-passage overlapping token occurrences before and after.

    Inputs must be the same records in the same order.
    """
    if len(triples_before) != len(triples_after):
        raise ValueError(
            f"record count mismatch: {len(triples_before)} before vs {len(triples_after)} after"
        )
    before = sum(occurrence_overlap(t.query, t.pos) for t in triples_before)
    after = sum(occurrence_overlap(t.query, t.pos) for t in triples_after)
    return OverlapReduction(tokens_before=before, tokens_after=after)


@dataclass
class SignificanceResult:
    statistic: float
    p_value: float
    alpha: float
    comparisons: int
    df: int

    @property
    def threshold(self) -> float:
        return self.alpha / self.comparisons

    @property
    def significant(self) -> bool:
        return self.p_value < self.threshold

    def as_kv(self) -> dict[str, object]:
        return {
            "t_statistic": f"{self.statistic:.6f}",
            "p_value": f"{self.p_value:.6g}",
            "alpha": self.alpha,
            "comparisons": self.comparisons,
            "threshold": f"{self.threshold:.6g}",
            "significant": str(self.significant).lower(),
        }


def paired_t_test(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    alpha: float = 0.05,
    comparisons: int = 1,
) -> SignificanceResult:
    """Two-sided paired t-test with a Bonferroni-corrected threshold alpha/m.

    The p-value comes from the regularized incomplete beta function, the
    exact tail integral of the t distribution.
    """
    if len(scores_a) != len(scores_b):
        raise ValueError(f"length mismatch: {len(scores_a)} vs {len(scores_b)}")
    n = len(scores_a)
    if n < 2:
        raise ValueError("need at least two paired observations")
    if comparisons < 1:
        raise ValueError("comparisons must be >= 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    diffs = [a - b for a, b in zip(scores_a, scores_b)]
    mean = sum(diffs) / n
    ss = sum((d - mean) ** 2 for d in diffs)
    if ss == 0.0:
        raise ValueError("degenerate input: paired differences have zero variance")
    sd = math.sqrt(ss / (n - 1))
    t = mean / (sd / math.sqrt(n))
    df = n - 1
    p = float(betainc(df / 2.0, 0.5, df / (df + t * t)))
    return SignificanceResult(statistic=t, p_value=p, alpha=alpha, comparisons=comparisons, df=df)


def metric_report_text(report: MetricReport, label: str = "run") -> str:
    rows = [(label, report.query_count, f"{report.mrr:.4f}")]
    return format_table(rows, ["system", "queries", f"mrr@{report.k}"])


def metric_report_kv(report: MetricReport) -> str:
    return format_kv_block(report.as_kv())
