"""Code-switching transformations over tokenized text.

Four strategies share one discipline:

* ``bl``             -- fixed target language per side, each word token
                        replaced with probability p;
* ``ml``             -- like ``bl`` but the target language is sampled
                        per token from a pool;
* ``wiki``           -- one language sampled per text, then a longest-first
                        n-gram scan against a title lexicon (n = 3, 2, 1);
* ``translate-test`` -- full term-by-term translation (p = 1).

Randomness never comes from a sequential generator. Every decision is a
stable 64-bit hash of (seed, record_id, side, token_index, purpose), so the
output for a record is a pure function of its inputs: independent of record
order, thread count, and everything previously processed. Word tokens are
index-addressed by their ordinal among word tokens, which makes a
single-language ``ml`` pool reproduce ``bl`` exactly.

On a Bernoulli success with no lexicon entry the token stays unswitched and
no retry occurs; retrying would distort the effective p in a
coverage-dependent way.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from .lexicon import BilingualLexicon, NGramLexicon
from .tokenizer import Token, tokenize
from .util import stable_hash64

__all__ = [
    "Token",
    "tokenize",
    "STRATEGIES",
    "SwitchPolicy",
    "SwitchOutcome",
    "SwitchRng",
    "SwitchStats",
    "CodeSwitcher",
    "switch_bilingual",
    "switch_multilingual",
    "switch_wiki",
    "translate_test",
]

STRATEGY_BL = "bl"
STRATEGY_ML = "ml"
STRATEGY_WIKI = "wiki"
STRATEGY_TRANSLATE_TEST = "translate-test"
STRATEGIES = (STRATEGY_BL, STRATEGY_ML, STRATEGY_WIKI, STRATEGY_TRANSLATE_TEST)


class SwitchRng:
    """Hash-derived random stream scoped to one (seed, record, side)."""

    __slots__ = ("seed", "record_id", "side")

    def __init__(self, seed: int, record_id: str, side: str):
        self.seed = seed
        self.record_id = record_id
        self.side = side

    def bernoulli(self, token_index: int, p: float) -> bool:
        u = stable_hash64(self.seed, self.record_id, self.side, token_index, "switch")
        return u / 2.0**64 < p

    def pick_language(self, token_index: int, languages: list[str]) -> str:
        u = stable_hash64(self.seed, self.record_id, self.side, token_index, "lang")
        return languages[u % len(languages)]

    def pick_text_language(self, languages: list[str]) -> str:
        u = stable_hash64(self.seed, self.record_id, self.side, "textlang")
        return languages[u % len(languages)]


@dataclass(frozen=True)
class SwitchPolicy:
    """Strategy, translation probability, language pools and seed for one run."""

    strategy: str
    p: float = 0.5
    query_langs: tuple[str, ...] = ()
    doc_langs: tuple[str, ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.strategy == STRATEGY_TRANSLATE_TEST:
            object.__setattr__(self, "p", 1.0)
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        object.__setattr__(self, "query_langs", tuple(self.query_langs))
        object.__setattr__(self, "doc_langs", tuple(self.doc_langs))
        if not self.query_langs or not self.doc_langs:
            raise ValueError("query_langs and doc_langs must be non-empty")
        if self.strategy in (STRATEGY_BL, STRATEGY_TRANSLATE_TEST):
            if len(self.query_langs) != 1 or len(self.doc_langs) != 1:
                raise ValueError(f"{self.strategy} requires exactly one language per side")

    @property
    def languages(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.query_langs) | set(self.doc_langs)))


@dataclass
class SwitchOutcome:
    """Result of switching one text, with token accounting.

    tokens_total counts every tokenizer span (words and separators);
    tokens_eligible counts word tokens; tokens_missed counts Bernoulli
    successes that found no lexicon entry.
    """

    text: str
    tokens_total: int
    tokens_eligible: int
    tokens_switched: int
    tokens_missed: int = 0
    per_language: dict[str, int] = field(default_factory=dict)


def _count_language(per_language: dict[str, int], language: str, n: int = 1) -> None:
    per_language[language] = per_language.get(language, 0) + n


def switch_bilingual(
    text: str, lexicon: BilingualLexicon, p: float, rng: SwitchRng
) -> SwitchOutcome:
    """Replace each word token with its translation with probability p."""
    tokens = tokenize(text)
    pieces: list[str] = []
    eligible = switched = missed = 0
    per_language: dict[str, int] = {}
    for token in tokens:
        if not token.is_word:
            pieces.append(token.surface)
            continue
        index = eligible
        eligible += 1
        if rng.bernoulli(index, p):
            translation = lexicon.lookup(token.surface)
            if translation is None:
                missed += 1
                pieces.append(token.surface)
            else:
                switched += 1
                _count_language(per_language, lexicon.tgt_lang)
                pieces.append(translation)
        else:
            pieces.append(token.surface)
    return SwitchOutcome(
        text="".join(pieces),
        tokens_total=len(tokens),
        tokens_eligible=eligible,
        tokens_switched=switched,
        tokens_missed=missed,
        per_language=per_language,
    )


def switch_multilingual(
    text: str, lexicons: Mapping[str, BilingualLexicon], p: float, rng: SwitchRng
) -> SwitchOutcome:
    """Like switch_bilingual, but sample a target language per token."""
    if not lexicons:
        raise ValueError("at least one lexicon required")
    languages = sorted(lexicons)
    tokens = tokenize(text)
    pieces: list[str] = []
    eligible = switched = missed = 0
    per_language: dict[str, int] = {}
    for token in tokens:
        if not token.is_word:
            pieces.append(token.surface)
            continue
        index = eligible
        eligible += 1
        if rng.bernoulli(index, p):
            language = rng.pick_language(index, languages)
            translation = lexicons[language].lookup(token.surface)
            if translation is None:
                missed += 1
                pieces.append(token.surface)
            else:
                switched += 1
                _count_language(per_language, language)
                pieces.append(translation)
        else:
            pieces.append(token.surface)
    return SwitchOutcome(
        text="".join(pieces),
        tokens_total=len(tokens),
        tokens_eligible=eligible,
        tokens_switched=switched,
        tokens_missed=missed,
        per_language=per_language,
    )


def switch_wiki(
    text: str, lexicons: Mapping[str, NGramLexicon], rng: SwitchRng
) -> SwitchOutcome:
    """Longest-first n-gram replacement with one language per text.

    Word windows of size 3, then 2, then 1 are tried at each position; a hit
    replaces the whole window (including interior whitespace) and the scan
    advances past it, so replacements never overlap. Windows only span
    whitespace separators: punctuation is never absorbed into a replacement.
    """
    if not lexicons:
        raise ValueError("at least one lexicon required")
    languages = sorted(lexicons)
    language = rng.pick_text_language(languages)
    lexicon = lexicons[language]
    tokens = tokenize(text)
    surfaces = [t.surface for t in tokens]
    word_positions = [i for i, t in enumerate(tokens) if t.is_word]
    switched = 0
    per_language: dict[str, int] = {}
    cursor = 0
    while cursor < len(word_positions):
        matched_n = 0
        for n in range(min(lexicon.max_n, len(word_positions) - cursor), 0, -1):
            span = word_positions[cursor : cursor + n]
            interior = range(span[0] + 1, span[-1])
            if any(
                not tokens[i].is_word and not tokens[i].surface.isspace() for i in interior
            ):
                continue
            key = tuple(tokens[i].surface.casefold() for i in span)
            translation = lexicon.lookup(key)
            if translation is None:
                continue
            surfaces[span[0]] = translation
            for i in range(span[0] + 1, span[-1] + 1):
                surfaces[i] = ""
            switched += n
            _count_language(per_language, language, n)
            matched_n = n
            break
        cursor += matched_n if matched_n else 1
    return SwitchOutcome(
        text="".join(surfaces),
        tokens_total=len(tokens),
        tokens_eligible=len(word_positions),
        tokens_switched=switched,
        per_language=per_language,
    )


def translate_test(text: str, lexicon: BilingualLexicon) -> SwitchOutcome:
    """Full term-by-term translation; untranslatable tokens pass through."""
    return switch_bilingual(text, lexicon, 1.0, SwitchRng(0, "", ""))


class CodeSwitcher:
    """Applies a SwitchPolicy to texts using per-language lexicons.

    Stateless given the immutable lexicons: safe to share across workers,
    and output is invariant to the degree of parallelism.
    """

    def __init__(
        self,
        policy: SwitchPolicy,
        lexicons: Mapping[str, BilingualLexicon | NGramLexicon],
    ):
        missing = [lang for lang in policy.languages if lang not in lexicons]
        if missing:
            raise ValueError(f"no lexicon provided for pooled language(s): {', '.join(missing)}")
        want_ngram = policy.strategy == STRATEGY_WIKI
        for lang in policy.languages:
            lex = lexicons[lang]
            if want_ngram and not isinstance(lex, NGramLexicon):
                raise ValueError(f"wiki strategy needs an n-gram lexicon for {lang!r}")
            if not want_ngram and not isinstance(lex, BilingualLexicon):
                raise ValueError(f"{policy.strategy} strategy needs a single-word lexicon for {lang!r}")
        self.policy = policy
        self.lexicons = dict(lexicons)

    def _pool(self, side: str) -> tuple[str, ...]:
        return self.policy.query_langs if side == "query" else self.policy.doc_langs

    def switch_text(self, text: str, record_id: str, side: str) -> SwitchOutcome:
        """Switch one text; `side` is 'query' or a document-side label."""
        policy = self.policy
        pool = self._pool(side)
        rng = SwitchRng(policy.seed, record_id, side)
        if policy.strategy == STRATEGY_WIKI:
            return switch_wiki(text, {lang: self.lexicons[lang] for lang in pool}, rng)
        if policy.strategy == STRATEGY_ML:
            return switch_multilingual(
                text, {lang: self.lexicons[lang] for lang in pool}, policy.p, rng
            )
        # bl and translate-test: exactly one language in the pool
        return switch_bilingual(text, self.lexicons[pool[0]], policy.p, rng)

    def switch_pair(
        self, query: str, doc: str, record_id: str
    ) -> tuple[str, str, SwitchOutcome, SwitchOutcome]:
        """Switch a query/document pair with their respective language pools."""
        query_outcome = self.switch_text(query, record_id, "query")
        doc_outcome = self.switch_text(doc, record_id, "doc")
        return query_outcome.text, doc_outcome.text, query_outcome, doc_outcome


@dataclass
class SwitchStats:
    """Aggregate switching statistics over many texts."""

    texts: int = 0
    texts_switched: int = 0
    tokens_total: int = 0
    tokens_eligible: int = 0
    tokens_switched: int = 0
    tokens_missed: int = 0
    per_language: Counter = field(default_factory=Counter)

    def add(self, outcome: SwitchOutcome) -> None:
        self.texts += 1
        if outcome.tokens_switched > 0:
            self.texts_switched += 1
        self.tokens_total += outcome.tokens_total
        self.tokens_eligible += outcome.tokens_eligible
        self.tokens_switched += outcome.tokens_switched
        self.tokens_missed += outcome.tokens_missed
        self.per_language.update(outcome.per_language)

    def merge(self, other: "SwitchStats") -> None:
        self.texts += other.texts
        self.texts_switched += other.texts_switched
        self.tokens_total += other.tokens_total
        self.tokens_eligible += other.tokens_eligible
        self.tokens_switched += other.tokens_switched
        self.tokens_missed += other.tokens_missed
        self.per_language.update(other.per_language)

    @property
    def switch_rate(self) -> float:
        """Realized fraction of word tokens switched."""
        return self.tokens_switched / self.tokens_eligible if self.tokens_eligible else 0.0

    @property
    def text_switch_rate(self) -> float:
        """Fraction of texts with at least one replacement."""
        return self.texts_switched / self.texts if self.texts else 0.0

    def as_kv(self, prefix: str = "") -> dict[str, object]:
        values: dict[str, object] = {
            f"{prefix}texts": self.texts,
            f"{prefix}texts_switched": self.texts_switched,
            f"{prefix}text_switch_rate": f"{self.text_switch_rate:.6f}",
            f"{prefix}tokens_total": self.tokens_total,
            f"{prefix}tokens_eligible": self.tokens_eligible,
            f"{prefix}tokens_switched": self.tokens_switched,
            f"{prefix}tokens_missed": self.tokens_missed,
            f"{prefix}switch_rate": f"{self.switch_rate:.6f}",
        }
        for language in sorted(self.per_language):
            values[f"{prefix}switched_{language}"] = self.per_language[language]
        return values
