"""Command-line interface: the full pipeline as reproducible subcommands.

Subcommands: induce-lexicon, code-switch, mix, eval, analyze-overlap,
toy-experiment. Every randomized subcommand requires an explicit --seed;
identical flags and seed produce identical output bytes, for any --jobs
value. Diagnostics (including the fully resolved configuration) go to
stderr; data goes to files or stdout. Report paths also render a matplotlib
figure next to the delimited output unless --no-figure is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus, ireval, plotting, toyrank
from .codeswitch import STRATEGIES, CodeSwitcher, SwitchPolicy
from .embeddings import induce_lexicon, load_embeddings
from .lexicon import (
    lexicon_stats,
    parse_wiki_titles,
    read_lexicon_tsv,
    write_lexicon_tsv,
)
from .util import format_kv_block, format_table

_RANDOMIZED = {"code-switch", "mix", "toy-experiment"}


def _echo_config(command: str, resolved: dict[str, object]) -> None:
    for key in sorted(resolved):
        print(f"# config {command}.{key} = {resolved[key]}", file=sys.stderr)


def _config_header(command: str, resolved: dict[str, object]) -> str:
    return "".join(f"# {command}.{key} = {resolved[key]}\n" for key in sorted(resolved))


def _resolved_config(args: argparse.Namespace) -> dict[str, object]:
    skip = {"func", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _merge_config_file(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config, encoding="utf-8") as handle:
        overrides = json.load(handle)
    if not isinstance(overrides, dict):
        raise ValueError(f"{args.config}: config file must hold a JSON object")
    known = vars(args)
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ValueError(f"{args.config}: unknown config key {key!r}")
        if known[dest] in (None, False):
            setattr(args, dest, value)


def _parse_lang_paths(pairs: list[str] | None, flag: str) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for pair in pairs or []:
        lang, sep, path = pair.partition("=")
        if not sep or not lang or not path:
            raise ValueError(f"{flag} expects LANG=PATH, got {pair!r}")
        if lang in mapping:
            raise ValueError(f"duplicate language {lang!r} for {flag}")
        mapping[lang] = path
    return mapping


def _csv_langs(value: str | None) -> tuple[str, ...]:
    if not value:
        return ()
    return tuple(part.strip() for part in value.split(",") if part.strip())


def _write_report(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _figure_path(args: argparse.Namespace, report_path: str | None) -> str | None:
    if getattr(args, "no_figure", False):
        return None
    if getattr(args, "figure", None):
        return args.figure
    if report_path:
        return str(Path(report_path).with_suffix(".png"))
    return None


def cmd_induce_lexicon(args: argparse.Namespace) -> int:
    src = load_embeddings(args.src, limit=args.limit, language=args.src_lang)
    tgt = load_embeddings(args.tgt, limit=args.limit, language=args.tgt_lang)
    lexicon = induce_lexicon(src, tgt)
    write_lexicon_tsv(lexicon, args.out)
    stats = lexicon_stats(lexicon)
    print(f"# induced {stats.size} entries from {len(src)} source terms", file=sys.stderr)
    if args.stats:
        with open(args.stats, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(stats.to_text() + format_kv_block(stats.as_kv()))
    return 0


def _load_switch_lexicons(args: argparse.Namespace, languages: tuple[str, ...]):
    paths = _parse_lang_paths(args.lexicon, "--lexicon")
    missing = [lang for lang in languages if lang not in paths]
    if missing:
        raise ValueError(f"no --lexicon given for pooled language(s): {', '.join(missing)}")
    lexicons = {}
    for lang in languages:
        if args.strategy == "wiki":
            lexicons[lang], stats = parse_wiki_titles(paths[lang], tgt_lang=lang)
            print(
                f"# lexicon {lang}: kept {stats.kept} of {stats.lines} titles "
                f"(dropped {stats.dropped_long} long, {stats.dropped_duplicate} duplicate, "
                f"{stats.dropped_empty} empty)",
                file=sys.stderr,
            )
        else:
            lexicons[lang] = read_lexicon_tsv(paths[lang], tgt_lang=lang)
            print(f"# lexicon {lang}: {len(lexicons[lang])} entries", file=sys.stderr)
    return lexicons


def _switch_once(args: argparse.Namespace, switcher: CodeSwitcher, out_path: str):
    if args.format == "triples":
        queries = corpus.read_queries(args.queries) if args.queries else None
        collection = corpus.read_collection(args.collection) if args.collection else None
        return corpus.transform_triples_stream(
            args.input, out_path, switcher, jobs=args.jobs,
            queries=queries, collection=collection,
        )
    return corpus.transform_texts_stream(
        args.input, out_path, switcher, side=args.side, jobs=args.jobs
    )


def cmd_code_switch(args: argparse.Namespace) -> int:
    query_langs = _csv_langs(args.query_langs)
    doc_langs = _csv_langs(args.doc_langs)
    paths = _parse_lang_paths(args.lexicon, "--lexicon")
    if not query_langs:
        query_langs = tuple(sorted(paths))
    if not doc_langs:
        doc_langs = tuple(sorted(paths))
    if args.sweep and args.out:
        raise ValueError("--sweep is an analysis mode; it excludes --out")
    if not args.sweep and not args.out:
        raise ValueError("--out is required (or use --sweep)")

    def build_switcher(p: float) -> CodeSwitcher:
        policy = SwitchPolicy(
            strategy=args.strategy,
            p=p,
            query_langs=query_langs,
            doc_langs=doc_langs,
            seed=args.seed,
        )
        return CodeSwitcher(policy, _load_switch_lexicons(args, policy.languages))

    resolved = _resolved_config(args)
    _echo_config("code-switch", resolved)
    if args.sweep:
        probabilities = [float(part) for part in args.sweep.split(",") if part.strip()]
        rows = []
        for p in probabilities:
            stats = _switch_once(args, build_switcher(p), "/dev/null").overall()
            rows.append(
                {
                    "p": f"{p:g}",
                    "tokens_eligible": stats.tokens_eligible,
                    "tokens_switched": stats.tokens_switched,
                    "tokens_missed": stats.tokens_missed,
                    "switch_rate": f"{stats.switch_rate:.6f}",
                    "text_switch_rate": f"{stats.text_switch_rate:.6f}",
                }
            )
        header = list(rows[0])
        body = "".join("\t".join(str(row[key]) for key in header) + "\n" for row in rows)
        report = _config_header("code-switch", resolved) + "\t".join(header) + "\n" + body
        _write_report(report, args.report)
        figure = _figure_path(args, args.report)
        if figure:
            plotting.save_sweep_figure(rows, figure)
            print(f"# figure written to {figure}", file=sys.stderr)
        return 0

    stats = _switch_once(args, build_switcher(args.p), args.out)
    kv = format_kv_block(stats.as_kv())
    if args.stats:
        with open(args.stats, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(_config_header("code-switch", resolved) + kv)
    else:
        sys.stdout.write(kv)
    return 0


def cmd_mix(args: argparse.Namespace) -> int:
    per_lang_paths = _parse_lang_paths(args.lang, "--lang")
    if not per_lang_paths:
        raise ValueError("at least one --lang LANG=PATH is required")
    per_lang = {lang: corpus.read_collection(path) for lang, path in per_lang_paths.items()}
    mixed, sidecar = corpus.mix_language_corpus(per_lang, seed=args.seed)
    corpus.write_two_column(mixed, args.out)
    if args.sidecar:
        corpus.write_two_column(sidecar, args.sidecar)
    _echo_config("mix", _resolved_config(args))
    print(f"# mixed {len(mixed)} records over {len(per_lang)} language(s)", file=sys.stderr)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    qrels = corpus.read_qrels(args.qrels)
    run = corpus.read_run(args.run)
    report = ireval.mrr_at_k(run, qrels, k=args.k)
    resolved = _resolved_config(args)
    _echo_config("eval", resolved)
    unjudged = sorted(set(run) - set(qrels))
    unranked = sorted(set(qrels) - set(run))
    if unjudged:
        print(
            f"# {len(unjudged)} run query(ies) without judgments excluded: "
            + ", ".join(unjudged[:10]),
            file=sys.stderr,
        )
    if unranked:
        print(
            f"# {len(unranked)} judged query(ies) absent from the run scored 0: "
            + ", ".join(unranked[:10]),
            file=sys.stderr,
        )
    rows = [("run", report.query_count, f"{report.mrr:.4f}")]
    kv = report.as_kv()
    baseline_report = None
    significance = None
    if args.baseline:
        baseline_report = ireval.mrr_at_k(corpus.read_run(args.baseline), qrels, k=args.k)
        rows.append(("baseline", baseline_report.query_count, f"{baseline_report.mrr:.4f}"))
        qids = sorted(report.per_query)
        significance = ireval.paired_t_test(
            [report.per_query[q] for q in qids],
            [baseline_report.per_query[q] for q in qids],
            alpha=args.alpha,
            comparisons=args.m,
        )
        kv.update({f"baseline_{k}": v for k, v in baseline_report.as_kv().items()})
        kv.update(significance.as_kv())
    text = (
        _config_header("eval", resolved)
        + format_table(rows, ["system", "queries", f"mrr@{args.k}"])
        + format_kv_block(kv)
    )
    _write_report(text, args.report)
    if args.per_query:
        with open(args.per_query, "w", encoding="utf-8", newline="\n") as handle:
            for qid in sorted(report.per_query):
                handle.write(f"{qid}\t{report.per_query[qid]:.6f}\n")
    figure = _figure_path(args, args.report)
    if figure:
        plotting.save_rr_figure(
            report.per_query,
            args.k,
            figure,
            baseline=baseline_report.per_query if baseline_report else None,
        )
        print(f"# figure written to {figure}", file=sys.stderr)
    return 0


def cmd_analyze_overlap(args: argparse.Namespace) -> int:
    resolved = _resolved_config(args)
    _echo_config("analyze-overlap", resolved)
    sections = [_config_header("analyze-overlap", resolved)]
    buckets = None
    if args.queries and args.collection and args.qrels and args.run:
        buckets = ireval.bucket_queries(
            corpus.read_queries(args.queries),
            corpus.read_collection(args.collection),
            corpus.read_qrels(args.qrels),
            corpus.read_run(args.run),
            k=args.k,
        )
        sections.append(buckets.to_text())
        sections.append(format_kv_block(buckets.as_kv()))
    if args.before or args.after:
        if not (args.before and args.after):
            raise ValueError("--before and --after must be given together")
        reduction = ireval.overlap_reduction(
            corpus.read_triples(args.before), corpus.read_triples(args.after)
        )
        sections.append(format_kv_block(reduction.as_kv()))
    if buckets is None and not args.before:
        raise ValueError(
            "nothing to analyze: give --queries/--collection/--qrels/--run "
            "and/or --before/--after"
        )
    _write_report("".join(sections), args.report)
    figure = _figure_path(args, args.report)
    if figure and buckets is not None:
        plotting.save_bucket_figure(buckets.bucket_mrr, buckets.bucket_count, buckets.k, figure)
        print(f"# figure written to {figure}", file=sys.stderr)
    return 0


def cmd_toy_experiment(args: argparse.Namespace) -> int:
    config = toyrank.ExperimentConfig(
        vocab_size=args.vocab_size,
        n_topics=args.topics,
        query_len=args.query_len,
        doc_len=args.doc_len,
        n_train=args.train_triples,
        n_test=args.test_queries,
        n_candidates=args.candidates,
        p=args.p,
        seed=args.seed,
        train=toyrank.TrainConfig(
            learning_rate=args.learning_rate,
            epochs=args.epochs,
            seed=args.seed,
            neg_ratio=args.neg_ratio,
        ),
    )
    report = toyrank.run_overfitting_experiment(config)
    resolved = _resolved_config(args)
    _echo_config("toy-experiment", resolved)
    text = (
        _config_header("toy-experiment", resolved)
        + report.to_text()
        + "\n"
        + format_kv_block(report.as_kv())
    )
    _write_report(text, args.report)
    figure = _figure_path(args, args.report)
    if figure:
        plotting.save_experiment_figure(report.mrr, figure)
        print(f"# figure written to {figure}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csir",
        description="Code-switched training data generation and reranker evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    induce = sub.add_parser("induce-lexicon", help="nearest-neighbor lexicon from aligned embeddings")
    induce.add_argument("--src", required=True, help="source-language embedding file (word2vec text)")
    induce.add_argument("--tgt", required=True, help="target-language embedding file")
    induce.add_argument("--out", required=True, help="output lexicon TSV")
    induce.add_argument("--limit", type=int, default=None, help="cap vocabulary size per side")
    induce.add_argument("--src-lang", default="", help="source language code")
    induce.add_argument("--tgt-lang", default="", help="target language code")
    induce.add_argument("--stats", default=None, help="write lexicon stats (text + key=value) to this file")
    induce.add_argument("--config", default=None, help="JSON config file merged under explicit flags")
    induce.set_defaults(func=cmd_induce_lexicon)

    switch = sub.add_parser("code-switch", help="apply a code-switching strategy to a corpus")
    switch.add_argument("--strategy", required=True, choices=STRATEGIES)
    switch.add_argument("--input", required=True, help="input TSV (triples or id<TAB>text)")
    switch.add_argument("--out", default=None, help="switched output TSV")
    switch.add_argument("--format", choices=("triples", "tsv"), default="triples")
    switch.add_argument("--side", choices=("query", "doc"), default="doc", help="pool for --format tsv")
    switch.add_argument("--queries", default=None, help="qid->text TSV to resolve id-form triples")
    switch.add_argument("--collection", default=None, help="docid->text TSV to resolve id-form triples")
    switch.add_argument(
        "--lexicon", action="append", metavar="LANG=PATH", help="lexicon file per language (repeatable)"
    )
    switch.add_argument("--query-langs", default=None, help="comma-separated query-side pool")
    switch.add_argument("--doc-langs", default=None, help="comma-separated document-side pool")
    switch.add_argument("--p", type=float, default=0.5, help="translation probability (default 0.5)")
    switch.add_argument("--seed", type=int, default=None, help="required: RNG seed")
    switch.add_argument("--jobs", type=int, default=1, help="worker processes; output is identical for any value")
    switch.add_argument("--stats", default=None, help="write switch statistics (key=value) to this file")
    switch.add_argument("--sweep", default=None, help="comma-separated p values: emit a rate table instead of data")
    switch.add_argument("--report", default=None, help="sweep table output (default stdout)")
    switch.add_argument("--figure", default=None, help="figure path (default: report path with .png)")
    switch.add_argument("--no-figure", action="store_true", help="disable figure rendering")
    switch.add_argument("--config", default=None, help="JSON config file merged under explicit flags")
    switch.set_defaults(func=cmd_code_switch)

    mix = sub.add_parser("mix", help="sample each record's language to build a mixed collection")
    mix.add_argument("--lang", action="append", metavar="LANG=PATH", help="collection per language (repeatable)")
    mix.add_argument("--out", required=True, help="mixed collection TSV")
    mix.add_argument("--sidecar", default=None, help="id<TAB>language sidecar TSV")
    mix.add_argument("--seed", type=int, default=None, help="required: RNG seed")
    mix.add_argument("--config", default=None, help="JSON config file merged under explicit flags")
    mix.set_defaults(func=cmd_mix)

    ev = sub.add_parser("eval", help="MRR@k for a run, optionally tested against a baseline")
    ev.add_argument("--run", required=True, help="TREC run file")
    ev.add_argument("--qrels", required=True, help="TREC qrels file")
    ev.add_argument("--k", type=int, default=10)
    ev.add_argument("--baseline", default=None, help="baseline TREC run for the paired t-test")
    ev.add_argument("--alpha", type=float, default=0.05)
    ev.add_argument("--m", type=int, default=1, help="number of comparisons (Bonferroni)")
    ev.add_argument("--per-query", default=None, help="dump per-query reciprocal ranks TSV")
    ev.add_argument("--report", default=None, help="report output (default stdout)")
    ev.add_argument("--figure", default=None, help="figure path (default: report path with .png)")
    ev.add_argument("--no-figure", action="store_true")
    ev.add_argument("--config", default=None, help="JSON config file merged under explicit flags")
    ev.set_defaults(func=cmd_eval)

    overlap = sub.add_parser("analyze-overlap", help="overlap buckets and/or overlap reduction")
    overlap.add_argument("--queries", default=None)
    overlap.add_argument("--collection", default=None)
    overlap.add_argument("--qrels", default=None)
    overlap.add_argument("--run", default=None)
    overlap.add_argument("--k", type=int, default=10)
    overlap.add_argument("--before", default=None, help="triples before switching")
    overlap.add_argument("--after", default=None, help="triples after switching")
    overlap.add_argument("--report", default=None, help="report output (default stdout)")
    overlap.add_argument("--figure", default=None)
    overlap.add_argument("--no-figure", action="store_true")
    overlap.add_argument("--config", default=None, help="JSON config file merged under explicit flags")
    overlap.set_defaults(func=cmd_analyze_overlap)

    toy = sub.add_parser("toy-experiment", help="synthetic monolingual-overfitting experiment")
    toy.add_argument("--seed", type=int, default=None, help="required: RNG seed")
    toy.add_argument("--p", type=float, default=0.5)
    toy.add_argument("--vocab-size", type=int, default=500)
    toy.add_argument("--topics", type=int, default=50)
    toy.add_argument("--query-len", type=int, default=4)
    toy.add_argument("--doc-len", type=int, default=12)
    toy.add_argument("--train-triples", type=int, default=600)
    toy.add_argument("--test-queries", type=int, default=200)
    toy.add_argument("--candidates", type=int, default=10)
    toy.add_argument("--epochs", type=int, default=400)
    toy.add_argument("--learning-rate", type=float, default=0.2)
    toy.add_argument("--neg-ratio", type=int, default=4)
    toy.add_argument("--report", default=None, help="report output (default stdout)")
    toy.add_argument("--figure", default=None)
    toy.add_argument("--no-figure", action="store_true")
    toy.add_argument("--config", default=None, help="JSON config file merged under explicit flags")
    toy.set_defaults(func=cmd_toy_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config_file(args)
        if args.command in _RANDOMIZED and args.seed is None:
            raise ValueError(
                f"{args.command} requires an explicit --seed; there is no wall-clock default"
            )
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {message}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
