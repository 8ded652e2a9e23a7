"""Bilingual term-translation lexicons: single-word and multi-word (n-gram).

Keys are case-folded at construction; targets keep their original casing.
Both lexicon kinds are immutable after construction and safe for concurrent
read-only lookup.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .tokenizer import word_tokens
from .util import ParseError

_WS_RE = re.compile(r"\s+")


@dataclass
class BilingualLexicon:
    """Single-token source terms mapped to target strings."""

    src_lang: str
    tgt_lang: str
    entries: dict[str, str]

    def __post_init__(self):
        folded: dict[str, str] = {}
        for key, value in self.entries.items():
            key = key.casefold()
            if not key or _WS_RE.search(key):
                raise ValueError(f"lexicon key must be a single token: {key!r}")
            folded.setdefault(key, value)
        self.entries = folded

    def lookup(self, token: str) -> str | None:
        """Case-folded exact match; None when untranslated."""
        return self.entries.get(token.casefold())

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token.casefold() in self.entries


@dataclass
class NGramLexicon:
    """Token-sequence keys (1..max_n tokens) mapped to target strings."""

    src_lang: str
    tgt_lang: str
    entries: dict[tuple[str, ...], str]
    max_n: int = 3

    def __post_init__(self):
        folded: dict[tuple[str, ...], str] = {}
        for key, value in self.entries.items():
            key = tuple(part.casefold() for part in key)
            if not 1 <= len(key) <= self.max_n:
                raise ValueError(f"n-gram key length out of range 1..{self.max_n}: {key}")
            folded.setdefault(key, value)
        self.entries = folded

    def lookup(self, key: Sequence[str]) -> str | None:
        return self.entries.get(tuple(part.casefold() for part in key))

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class WikiIngestStats:
    """Kept/dropped accounting for one parallel-title file."""

    lines: int = 0
    kept: int = 0
    dropped_long: int = 0
    dropped_empty: int = 0
    dropped_duplicate: int = 0


def parse_wiki_titles(
    path, max_n: int = 3, src_lang: str = "", tgt_lang: str = ""
) -> tuple[NGramLexicon, WikiIngestStats]:
    """Ingest a two-column parallel-title TSV into an n-gram lexicon.

    Source titles are tokenized with the toolkit tokenizer; titles of more
    than `max_n` word tokens are dropped (equivalent for matching, cheaper
    than keeping them). Duplicate keys keep the first occurrence. Internal
    whitespace in targets is collapsed to single spaces.
    """
    entries: dict[tuple[str, ...], str] = {}
    stats = WikiIngestStats()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            stats.lines += 1
            columns = line.split("\t")
            if len(columns) != 2:
                raise ParseError(path, line_no, f"expected 2 tab-separated columns, found {len(columns)}")
            source, target = columns
            key = tuple(t.casefold() for t in word_tokens(source))
            target = _WS_RE.sub(" ", target.strip())
            if not key or not target:
                stats.dropped_empty += 1
                continue
            if len(key) > max_n:
                stats.dropped_long += 1
                continue
            if key in entries:
                stats.dropped_duplicate += 1
                continue
            entries[key] = target
            stats.kept += 1
    return (
        NGramLexicon(src_lang=src_lang, tgt_lang=tgt_lang, entries=entries, max_n=max_n),
        stats,
    )


def read_lexicon_tsv(path, src_lang: str = "", tgt_lang: str = "") -> BilingualLexicon:
    """Read a two-column single-word lexicon TSV (first occurrence wins)."""
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            columns = line.split("\t")
            if len(columns) != 2:
                raise ParseError(path, line_no, f"expected 2 tab-separated columns, found {len(columns)}")
            source, target = columns
            if not source or _WS_RE.search(source):
                raise ParseError(path, line_no, f"source term must be a single token: {source!r}")
            entries.setdefault(source.casefold(), target)
    return BilingualLexicon(src_lang=src_lang, tgt_lang=tgt_lang, entries=entries)


def write_lexicon_tsv(lexicon: BilingualLexicon, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for source, target in lexicon.entries.items():
            handle.write(f"{source}\t{target}\n")


@dataclass
class LexiconStats:
    size: int
    ngram_histogram: dict[int, int]
    coverage: float | None = None

    def as_kv(self) -> dict[str, object]:
        values: dict[str, object] = {"size": self.size}
        for n in sorted(self.ngram_histogram):
            values[f"ngrams_{n}"] = self.ngram_histogram[n]
        if self.coverage is not None:
            values["coverage"] = f"{self.coverage:.6f}"
        return values

    def to_text(self) -> str:
        lines = [f"entries: {self.size}"]
        for n in sorted(self.ngram_histogram):
            lines.append(f"  {n}-gram entries: {self.ngram_histogram[n]}")
        if self.coverage is not None:
            lines.append(f"token coverage: {self.coverage:.4f}")
        return "\n".join(lines) + "\n"


def lexicon_stats(
    lexicon: BilingualLexicon | NGramLexicon, vocab: Iterable[str] | None = None
) -> LexiconStats:
    """Size, n-gram histogram, and optionally unigram coverage of a token multiset."""
    if isinstance(lexicon, NGramLexicon):
        histogram = Counter(len(key) for key in lexicon.entries)
        has = lambda token: (token.casefold(),) in lexicon.entries  # noqa: E731
    else:
        histogram = Counter({1: len(lexicon.entries)} if lexicon.entries else {})
        has = lexicon.__contains__
    coverage = None
    if vocab is not None:
        tokens = list(vocab)
        coverage = (
            sum(1 for token in tokens if has(token)) / len(tokens) if tokens else 0.0
        )
    return LexiconStats(size=len(lexicon), ngram_histogram=dict(histogram), coverage=coverage)
