"""MS MARCO-style corpus I/O and mixed-language test-collection construction.

File formats (all UTF-8, LF-terminated):

* collection.tsv  ``docid<TAB>passage``
* queries.tsv     ``qid<TAB>text``
* triples         ``query<TAB>positive<TAB>negative`` (text or id form)
* qrels           TREC 4-column ``qid 0 docid rel``
* run             TREC 6-column ``qid Q0 docid rank score tag``

Collections can exceed memory, so the triple/text transforms stream
line-by-line; readers that build dicts validate ids as they go.
"""

from __future__ import annotations

import hashlib
import multiprocessing
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, NamedTuple

from .codeswitch import CodeSwitcher, SwitchStats
from .util import ParseError, stable_hash64


class Triple(NamedTuple):
    query: str
    pos: str
    neg: str


class RunEntry(NamedTuple):
    doc_id: str
    rank: int
    score: float


Collection = dict[str, str]
QuerySet = dict[str, str]
TripleSet = list[Triple]
Qrels = dict[str, dict[str, int]]
Run = dict[str, list[RunEntry]]


def _read_two_column(path, kind: str) -> dict[str, str]:
    records: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            columns = line.split("\t")
            if len(columns) != 2:
                raise ParseError(path, line_no, f"expected 2 tab-separated columns, found {len(columns)}")
            record_id, text = columns
            if not record_id:
                raise ParseError(path, line_no, "empty id")
            if not text:
                raise ParseError(path, line_no, f"empty text for {kind} {record_id!r}")
            if record_id in records:
                raise ParseError(path, line_no, f"duplicate {kind} id {record_id!r}")
            records[record_id] = text
    return records


def read_collection(path) -> Collection:
    return _read_two_column(path, "document")


def read_queries(path) -> QuerySet:
    return _read_two_column(path, "query")


def write_two_column(records: Mapping[str, str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record_id, text in records.items():
            handle.write(f"{record_id}\t{text}\n")


write_collection = write_two_column
write_queries = write_two_column


def iter_triples(path) -> Iterator[Triple]:
    """Stream 3-column triples from a TSV file."""
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            columns = line.split("\t")
            if len(columns) != 3:
                raise ParseError(path, line_no, f"expected 3 tab-separated columns, found {len(columns)}")
            query, pos, neg = columns
            if pos == neg:
                raise ParseError(path, line_no, "positive and negative passages are identical")
            yield Triple(query, pos, neg)


def read_triples(path) -> TripleSet:
    return list(iter_triples(path))


def write_triples(triples: Iterable[Triple], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for triple in triples:
            handle.write(f"{triple.query}\t{triple.pos}\t{triple.neg}\n")


def read_qrels(path) -> Qrels:
    qrels: Qrels = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if len(fields) != 4:
                raise ParseError(path, line_no, f"expected 4 fields, found {len(fields)}")
            qid, _, doc_id, grade_text = fields
            try:
                grade = int(grade_text)
            except ValueError:
                raise ParseError(path, line_no, f"bad relevance grade {grade_text!r}") from None
            if grade < 0:
                raise ParseError(path, line_no, f"negative relevance grade {grade}")
            per_query = qrels.setdefault(qid, {})
            if doc_id in per_query:
                raise ParseError(path, line_no, f"duplicate judgment for ({qid}, {doc_id})")
            per_query[doc_id] = grade
    return qrels


def write_qrels(qrels: Qrels, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for qid, judgments in qrels.items():
            for doc_id, grade in judgments.items():
                handle.write(f"{qid} 0 {doc_id} {grade}\n")


def read_run(path) -> Run:
    """Read a TREC run file; ranks must strictly increase within a query.

    The score column is only validated against the rank ordering (a warning
    on disagreement); ranking always follows the rank field.
    """
    run: Run = {}
    seen_docs: dict[str, set[str]] = {}
    score_warned = False
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            fields = line.split()
            if len(fields) != 6:
                raise ParseError(path, line_no, f"expected 6 fields, found {len(fields)}")
            qid, _, doc_id, rank_text, score_text, _tag = fields
            try:
                rank = int(rank_text)
                score = float(score_text)
            except ValueError:
                raise ParseError(path, line_no, f"bad rank/score: {rank_text!r} {score_text!r}") from None
            entries = run.setdefault(qid, [])
            docs = seen_docs.setdefault(qid, set())
            if doc_id in docs:
                raise ParseError(path, line_no, f"duplicate document {doc_id!r} for query {qid!r}")
            if entries and rank <= entries[-1].rank:
                raise ParseError(path, line_no, f"rank {rank} does not increase for query {qid!r}")
            if entries and score > entries[-1].score and not score_warned:
                warnings.warn(
                    f"{path}:{line_no}: score order disagrees with rank order "
                    f"for query {qid!r}; ranks take precedence"
                )
                score_warned = True
            docs.add(doc_id)
            entries.append(RunEntry(doc_id, rank, score))
    return run


def write_run(run: Run, path, tag: str = "csir") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for qid, entries in run.items():
            for entry in entries:
                handle.write(f"{qid} Q0 {entry.doc_id} {entry.rank} {entry.score:g} {tag}\n")


def mix_language_corpus(
    per_lang: Mapping[str, Mapping[str, str]], seed: int
) -> tuple[dict[str, str], dict[str, str]]:
    """Pick each record's text from one language, uniformly and id-keyed.

    All input collections must share the same id set. Returns the mixed
    collection (sorted by id) plus a sidecar map id -> chosen language.
    The choice depends only on (seed, id), never on input order.
    """
    if not per_lang:
        raise ValueError("at least one language required")
    languages = sorted(per_lang)
    reference = set(per_lang[languages[0]])
    for language in languages[1:]:
        ids = set(per_lang[language])
        if ids != reference:
            missing = sorted(reference - ids)[:10]
            extra = sorted(ids - reference)[:10]
            detail = []
            if missing:
                detail.append(f"missing from {language}: {', '.join(missing)}")
            if extra:
                detail.append(f"unexpected in {language}: {', '.join(extra)}")
            raise ValueError("id sets differ between languages; " + "; ".join(detail))
    mixed: dict[str, str] = {}
    sidecar: dict[str, str] = {}
    for record_id in sorted(reference):
        language = languages[stable_hash64(seed, record_id, "mixlang") % len(languages)]
        mixed[record_id] = per_lang[language][record_id]
        sidecar[record_id] = language
    return mixed, sidecar


def triple_record_id(triple: Triple) -> str:
    """Content-derived record id: keeps switching independent of file order."""
    digest = hashlib.blake2b(digest_size=16)
    for fragment in triple:
        data = fragment.encode("utf-8")
        digest.update(len(data).to_bytes(4, "big"))
        digest.update(data)
    return digest.hexdigest()


@dataclass
class TransformStats:
    """Per-side switching statistics for a triple/text transformation."""

    queries: SwitchStats = field(default_factory=SwitchStats)
    docs: SwitchStats = field(default_factory=SwitchStats)

    def overall(self) -> SwitchStats:
        combined = SwitchStats()
        combined.merge(self.queries)
        combined.merge(self.docs)
        return combined

    def as_kv(self) -> dict[str, object]:
        values = self.queries.as_kv("query_")
        values.update(self.docs.as_kv("doc_"))
        values.update(self.overall().as_kv("all_"))
        return values


def switch_triple(triple: Triple, switcher: CodeSwitcher) -> tuple[Triple, tuple]:
    """Switch one triple: query with the query pool, both passages with the doc pool."""
    record_id = triple_record_id(triple)
    out_query = switcher.switch_text(triple.query, record_id, "query")
    out_pos = switcher.switch_text(triple.pos, record_id, "pos")
    out_neg = switcher.switch_text(triple.neg, record_id, "neg")
    return Triple(out_query.text, out_pos.text, out_neg.text), (out_query, out_pos, out_neg)


def transform_triples(
    triples: Iterable[Triple], switcher: CodeSwitcher, stats: TransformStats | None = None
) -> TripleSet:
    """In-memory variant of the streaming transform; preserves record count/order."""
    out: TripleSet = []
    for triple in triples:
        switched, (q, p, n) = switch_triple(triple, switcher)
        if stats is not None:
            stats.queries.add(q)
            stats.docs.add(p)
            stats.docs.add(n)
        out.append(switched)
    return out


# Fork-inherited worker state for multiprocessing: the switcher is immutable,
# so children share it read-only without pickling lexicons per task.
_WORKER_SWITCHER: CodeSwitcher | None = None
_WORKER_MODE: str = "triples"
_WORKER_SIDE: str = "doc"


def _switch_task(item):
    switcher = _WORKER_SWITCHER
    if _WORKER_MODE == "triples":
        record_id, query, pos, neg = item
        out_query = switcher.switch_text(query, record_id, "query")
        out_pos = switcher.switch_text(pos, record_id, "pos")
        out_neg = switcher.switch_text(neg, record_id, "neg")
        counts = [_outcome_counts(o) for o in (out_query, out_pos, out_neg)]
        return Triple(out_query.text, out_pos.text, out_neg.text), counts
    record_id, text = item
    outcome = switcher.switch_text(text, record_id, _WORKER_SIDE)
    return (record_id, outcome.text), [_outcome_counts(outcome)]


def _outcome_counts(outcome) -> tuple:
    return (
        outcome.tokens_total,
        outcome.tokens_eligible,
        outcome.tokens_switched,
        outcome.tokens_missed,
        tuple(sorted(outcome.per_language.items())),
    )


def _add_counts(stats: SwitchStats, counts: tuple) -> None:
    total, eligible, switched, missed, per_language = counts
    stats.texts += 1
    if switched > 0:
        stats.texts_switched += 1
    stats.tokens_total += total
    stats.tokens_eligible += eligible
    stats.tokens_switched += switched
    stats.tokens_missed += missed
    for language, count in per_language:
        stats.per_language[language] += count


def _parallel_map(func, items, jobs: int, chunksize: int = 64):
    if jobs <= 1:
        yield from map(func, items)
        return
    context = multiprocessing.get_context("fork")
    with context.Pool(processes=jobs) as pool:
        yield from pool.imap(func, items, chunksize=chunksize)


def resolve_id_triples(
    triples: Iterable[Triple], queries: Mapping[str, str], collection: Mapping[str, str]
) -> Iterator[tuple[str, str, str, str]]:
    """Join id-form triples (qid, pos-pid, neg-pid) against their texts.

    The record id stays derived from the id fields, so the switched output
    does not depend on join order.
    """
    for triple in triples:
        if triple.query not in queries:
            raise KeyError(f"query id {triple.query!r} not in the query set")
        for pid in (triple.pos, triple.neg):
            if pid not in collection:
                raise KeyError(f"passage id {pid!r} not in the collection")
        yield (
            triple_record_id(triple),
            queries[triple.query],
            collection[triple.pos],
            collection[triple.neg],
        )


def switch_triple_stream(
    items: Iterable[tuple[str, str, str, str]],
    switcher: CodeSwitcher,
    stats: TransformStats,
    jobs: int = 1,
) -> Iterator[Triple]:
    """Core streaming transform over (record_id, query, pos, neg) work items.

    Lazy: consumes one item per yielded record (bounded read-ahead under
    jobs > 1), so arbitrarily large corpora pass through in constant memory.
    """
    global _WORKER_SWITCHER, _WORKER_MODE
    _WORKER_SWITCHER = switcher
    _WORKER_MODE = "triples"
    try:
        for switched, counts in _parallel_map(_switch_task, items, jobs):
            _add_counts(stats.queries, counts[0])
            _add_counts(stats.docs, counts[1])
            _add_counts(stats.docs, counts[2])
            yield switched
    finally:
        _WORKER_SWITCHER = None


def transform_triples_stream(
    in_path,
    out_path,
    switcher: CodeSwitcher,
    jobs: int = 1,
    queries: Mapping[str, str] | None = None,
    collection: Mapping[str, str] | None = None,
) -> TransformStats:
    """Switch a triples file record-by-record in constant memory.

    Text-form triples are switched directly; when `queries` and `collection`
    are given the file is read as id-form triples and joined first. Output is
    byte-identical for any `jobs` value: every record's switch is a pure
    function of its content and the policy seed, and results are written in
    input order.
    """
    if (queries is None) != (collection is None):
        raise ValueError("id-form triples need both queries and collection")
    if queries is not None:
        items = resolve_id_triples(iter_triples(in_path), queries, collection)
    else:
        items = (
            (triple_record_id(t), t.query, t.pos, t.neg) for t in iter_triples(in_path)
        )
    stats = TransformStats()
    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        for switched in switch_triple_stream(items, switcher, stats, jobs=jobs):
            out.write(f"{switched.query}\t{switched.pos}\t{switched.neg}\n")
    return stats


def transform_texts_stream(
    in_path, out_path, switcher: CodeSwitcher, side: str = "doc", jobs: int = 1
) -> TransformStats:
    """Switch a two-column id<TAB>text file; the id doubles as the record id."""
    global _WORKER_SWITCHER, _WORKER_MODE, _WORKER_SIDE
    _WORKER_SWITCHER = switcher
    _WORKER_MODE = "texts"
    _WORKER_SIDE = side
    stats = TransformStats()
    target = stats.queries if side == "query" else stats.docs

    def rows() -> Iterator[tuple[str, str]]:
        with open(in_path, encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                columns = line.split("\t")
                if len(columns) != 2:
                    raise ParseError(in_path, line_no, f"expected 2 tab-separated columns, found {len(columns)}")
                yield columns[0], columns[1]

    try:
        with open(out_path, "w", encoding="utf-8", newline="\n") as out:
            for (record_id, text), counts in _parallel_map(_switch_task, rows(), jobs):
                _add_counts(target, counts[0])
                out.write(f"{record_id}\t{text}\n")
    finally:
        _WORKER_SWITCHER = None
    return stats
