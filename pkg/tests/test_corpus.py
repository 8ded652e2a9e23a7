"""Corpus I/O, language mixing, and triple transformation tests."""

import warnings

import pytest
from scipy.stats import binom

from csir.codeswitch import CodeSwitcher, SwitchPolicy
from csir.corpus import (
    TransformStats,
    Triple,
    iter_triples,
    mix_language_corpus,
    read_collection,
    read_qrels,
    read_queries,
    read_run,
    read_triples,
    resolve_id_triples,
    switch_triple_stream,
    transform_triples,
    transform_triples_stream,
    transform_texts_stream,
    triple_record_id,
    write_qrels,
    write_run,
    write_triples,
    write_two_column,
)
from csir.lexicon import BilingualLexicon
from csir.util import ParseError


def bl_switcher(p=0.5, seed=5, words=None):
    words = words or [f"w{i}" for i in range(100)]
    lexicons = {
        "de": BilingualLexicon("en", "de", {w: f"de_{w}" for w in words}),
        "ru": BilingualLexicon("en", "ru", {w: f"ru_{w}" for w in words}),
    }
    policy = SwitchPolicy(strategy="bl", p=p, query_langs=("de",), doc_langs=("ru",), seed=seed)
    return CodeSwitcher(policy, lexicons)


class TestReaders:
    def test_collection_fixture(self, tmp_path):
        path = tmp_path / "collection.tsv"
        path.write_text("d1\tfirst passage\nd2\tsecond\nd3\tthird\n", encoding="utf-8")
        collection = read_collection(path)
        assert len(collection) == 3
        assert collection["d2"] == "second"

    def test_duplicate_doc_id(self, tmp_path):
        path = tmp_path / "collection.tsv"
        path.write_text("d1\ta\nd1\tb\n", encoding="utf-8")
        with pytest.raises(ParseError, match="duplicate"):
            read_collection(path)

    def test_empty_text_rejected(self, tmp_path):
        path = tmp_path / "collection.tsv"
        path.write_text("d1\t\n", encoding="utf-8")
        with pytest.raises(ParseError, match="empty text"):
            read_collection(path)

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "queries.tsv"
        path.write_text("q1\tfine\nbroken line\n", encoding="utf-8")
        with pytest.raises(ParseError, match=":2:"):
            read_queries(path)

    def test_run_line(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("q1 Q0 d7 1 12.5 tag\n", encoding="utf-8")
        run = read_run(path)
        entry = run["q1"][0]
        assert (entry.doc_id, entry.rank, entry.score) == ("d7", 1, 12.5)

    def test_qrels_line(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("q1 0 d7 1\n", encoding="utf-8")
        assert read_qrels(path) == {"q1": {"d7": 1}}

    def test_run_rank_must_increase(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("q1 Q0 d1 1 2.0 t\nq1 Q0 d2 1 1.0 t\n", encoding="utf-8")
        with pytest.raises(ParseError, match="rank"):
            read_run(path)

    def test_run_duplicate_doc(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("q1 Q0 d1 1 2.0 t\nq1 Q0 d1 2 1.0 t\n", encoding="utf-8")
        with pytest.raises(ParseError, match="duplicate"):
            read_run(path)

    def test_run_score_disagreement_warns(self, tmp_path):
        path = tmp_path / "run.txt"
        path.write_text("q1 Q0 d1 1 1.0 t\nq1 Q0 d2 2 5.0 t\n", encoding="utf-8")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            read_run(path)
        assert any("score order" in str(w.message) for w in caught)

    def test_triples_pos_neg_must_differ(self, tmp_path):
        path = tmp_path / "triples.tsv"
        path.write_text("q\tsame\tsame\n", encoding="utf-8")
        with pytest.raises(ParseError, match="identical"):
            read_triples(path)

    def test_qrels_negative_grade_rejected(self, tmp_path):
        path = tmp_path / "qrels.txt"
        path.write_text("q1 0 d1 -1\n", encoding="utf-8")
        with pytest.raises(ParseError, match="negative"):
            read_qrels(path)


class TestRoundTrip:
    def test_two_column(self, tmp_path):
        original = tmp_path / "in.tsv"
        original.write_text("d1\tsome text\nd2\tmore text\n", encoding="utf-8")
        copied = tmp_path / "out.tsv"
        write_two_column(read_collection(original), copied)
        assert copied.read_bytes() == original.read_bytes()

    def test_triples(self, tmp_path):
        original = tmp_path / "in.tsv"
        original.write_text("q one\tpos one\tneg one\nq two\tpos two\tneg two\n", encoding="utf-8")
        copied = tmp_path / "out.tsv"
        write_triples(read_triples(original), copied)
        assert copied.read_bytes() == original.read_bytes()

    def test_qrels(self, tmp_path):
        original = tmp_path / "in.txt"
        original.write_text("q1 0 d1 1\nq1 0 d2 0\nq2 0 d3 2\n", encoding="utf-8")
        copied = tmp_path / "out.txt"
        write_qrels(read_qrels(original), copied)
        assert copied.read_bytes() == original.read_bytes()

    def test_run(self, tmp_path):
        original = tmp_path / "in.txt"
        original.write_text("q1 Q0 d1 1 2.5 tag\nq1 Q0 d2 2 1 tag\n", encoding="utf-8")
        copied = tmp_path / "out.txt"
        write_run(read_run(original), copied, tag="tag")
        assert copied.read_bytes() == original.read_bytes()


class TestMixLanguageCorpus:
    def test_single_language_is_copy(self):
        collection = {"d1": "text one", "d2": "text two"}
        mixed, sidecar = mix_language_corpus({"de": collection}, seed=1)
        assert mixed == collection
        assert set(sidecar.values()) == {"de"}

    def test_two_language_share_binomial(self):
        ids = [f"d{i}" for i in range(10_000)]
        per_lang = {
            "de": {i: f"de {i}" for i in ids},
            "ru": {i: f"ru {i}" for i in ids},
        }
        _, sidecar = mix_language_corpus(per_lang, seed=11)
        count_de = sum(1 for lang in sidecar.values() if lang == "de")
        lo = binom.ppf(0.0005, 10_000, 0.5)
        hi = binom.ppf(0.9995, 10_000, 0.5)
        assert lo <= count_de <= hi

    def test_permuted_input_order_identical(self):
        ids = [f"d{i}" for i in range(500)]
        de = {i: f"de {i}" for i in ids}
        ru = {i: f"ru {i}" for i in ids}
        forward = mix_language_corpus({"de": de, "ru": ru}, seed=3)
        reversed_langs = mix_language_corpus({"ru": ru, "de": de}, seed=3)
        shuffled = mix_language_corpus(
            {"de": dict(reversed(list(de.items()))), "ru": ru}, seed=3
        )
        assert forward == reversed_langs == shuffled

    def test_sidecar_covers_every_id_once(self):
        ids = [f"d{i}" for i in range(50)]
        per_lang = {"a": {i: "x" for i in ids}, "b": {i: "y" for i in ids}}
        mixed, sidecar = mix_language_corpus(per_lang, seed=0)
        assert set(mixed) == set(ids)
        assert set(sidecar) == set(ids)

    def test_id_mismatch_lists_missing(self):
        per_lang = {"a": {"d1": "x", "d2": "x"}, "b": {"d1": "y"}}
        with pytest.raises(ValueError, match="d2"):
            mix_language_corpus(per_lang, seed=0)


class TestTransformTriples:
    def triples(self, n=30):
        return [Triple(f"w{i} w{i+1}", f"w{i+2} w{i+3}", f"w{i+4} w{i+5}") for i in range(n)]

    def test_p_zero_is_identity(self):
        triples = self.triples()
        assert transform_triples(triples, bl_switcher(p=0.0)) == triples

    def test_record_count_preserved(self):
        triples = self.triples()
        assert len(transform_triples(triples, bl_switcher())) == len(triples)

    def test_sides_use_their_pools(self):
        switcher = bl_switcher(p=1.0)
        out = transform_triples([Triple("w1 w2", "w3 w4", "w5 w6")], switcher)[0]
        assert out.query == "de_w1 de_w2"
        assert out.pos == "ru_w3 ru_w4"
        assert out.neg == "ru_w5 ru_w6"

    def test_order_independence(self):
        triples = self.triples()
        switcher = bl_switcher()
        forward = transform_triples(triples, switcher)
        backward = list(reversed(transform_triples(list(reversed(triples)), switcher)))
        assert forward == backward

    def test_record_id_depends_on_content_only(self):
        a = triple_record_id(Triple("q", "p", "n"))
        b = triple_record_id(Triple("q", "p", "n"))
        c = triple_record_id(Triple("q", "pn", ""))
        assert a == b
        assert a != c


class TestStreamingTransform:
    def write_triples_file(self, path, n=200):
        with open(path, "w", encoding="utf-8") as handle:
            for i in range(n):
                handle.write(f"w{i % 50} w{(i + 1) % 50}\tw{(i + 2) % 50}\tw{(i + 3) % 50}\n")

    def test_stream_matches_in_memory(self, tmp_path):
        src = tmp_path / "triples.tsv"
        self.write_triples_file(src)
        out = tmp_path / "switched.tsv"
        stats = transform_triples_stream(src, out, bl_switcher())
        in_memory = transform_triples(read_triples(src), bl_switcher())
        assert read_triples(out) == in_memory
        assert stats.queries.texts == 200
        assert stats.docs.texts == 400

    def test_jobs_do_not_change_output(self, tmp_path):
        src = tmp_path / "triples.tsv"
        self.write_triples_file(src, n=500)
        out1 = tmp_path / "jobs1.tsv"
        out4 = tmp_path / "jobs4.tsv"
        stats1 = transform_triples_stream(src, out1, bl_switcher(), jobs=1)
        stats4 = transform_triples_stream(src, out4, bl_switcher(), jobs=4)
        assert out1.read_bytes() == out4.read_bytes()
        assert stats1.overall().as_kv() == stats4.overall().as_kv()

    def test_input_consumed_lazily(self):
        # constant-memory contract: the stream must never read far ahead of
        # what it has yielded, so huge corpora pass through a bounded window
        consumed = 0

        def work_items():
            nonlocal consumed
            for i in range(1_000_000):
                consumed += 1
                yield (f"r{i}", f"w{i % 9}", f"w{(i + 1) % 9}", f"w{(i + 2) % 9}")

        switcher = bl_switcher(words=[f"w{i}" for i in range(9)])
        stats = TransformStats()
        produced = 0
        max_lookahead = 0
        for _ in switch_triple_stream(work_items(), switcher, stats):
            produced += 1
            max_lookahead = max(max_lookahead, consumed - produced)
            if produced == 500:
                break
        assert max_lookahead <= 1
        assert consumed <= 501

    def test_texts_stream_uses_record_ids(self, tmp_path):
        src = tmp_path / "queries.tsv"
        src.write_text("q1\tw1 w2\nq2\tw3 w4\n", encoding="utf-8")
        out = tmp_path / "switched.tsv"
        stats = transform_texts_stream(src, out, bl_switcher(p=1.0), side="query")
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines == ["q1\tde_w1 de_w2", "q2\tde_w3 de_w4"]
        assert stats.queries.texts == 2

    def test_iter_triples_is_lazy(self, tmp_path):
        src = tmp_path / "triples.tsv"
        self.write_triples_file(src, n=50)
        iterator = iter_triples(src)
        first = next(iterator)
        assert first.query.startswith("w0")


class TestIdTripleJoin:
    def fixtures(self):
        queries = {"q1": "w1 w2", "q2": "w3 w4"}
        collection = {"p1": "w5 w6", "p2": "w7 w8", "p3": "w9 w10"}
        id_triples = [Triple("q1", "p1", "p2"), Triple("q2", "p3", "p1")]
        return queries, collection, id_triples

    def test_join_resolves_texts(self):
        queries, collection, id_triples = self.fixtures()
        items = list(resolve_id_triples(id_triples, queries, collection))
        assert items[0][1:] == ("w1 w2", "w5 w6", "w7 w8")
        assert items[1][1:] == ("w3 w4", "w9 w10", "w5 w6")
        # record ids derive from the id fields, not the texts
        assert items[0][0] == triple_record_id(id_triples[0])

    def test_unknown_query_id(self):
        queries, collection, id_triples = self.fixtures()
        del queries["q2"]
        with pytest.raises(KeyError, match="q2"):
            list(resolve_id_triples(id_triples, queries, collection))

    def test_unknown_passage_id(self):
        queries, collection, id_triples = self.fixtures()
        del collection["p3"]
        with pytest.raises(KeyError, match="p3"):
            list(resolve_id_triples(id_triples, queries, collection))

    def test_stream_with_join(self, tmp_path):
        queries, collection, id_triples = self.fixtures()
        src = tmp_path / "id_triples.tsv"
        write_triples(id_triples, src)
        out = tmp_path / "switched.tsv"
        words = [f"w{i}" for i in range(12)]
        transform_triples_stream(
            src, out, bl_switcher(p=1.0, words=words), queries=queries, collection=collection
        )
        switched = read_triples(out)
        assert switched[0] == Triple("de_w1 de_w2", "ru_w5 ru_w6", "ru_w7 ru_w8")

    def test_join_requires_both_sides(self, tmp_path):
        src = tmp_path / "id_triples.tsv"
        write_triples([Triple("q1", "p1", "p2")], src)
        with pytest.raises(ValueError, match="both"):
            transform_triples_stream(
                src, tmp_path / "out.tsv", bl_switcher(), queries={"q1": "x"}
            )
