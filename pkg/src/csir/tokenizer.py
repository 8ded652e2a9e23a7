"""Lossless word/separator tokenizer shared by the switching and lexicon code."""

from __future__ import annotations

import re
from dataclasses import dataclass

# Three mutually exclusive classes that together cover every character:
# whitespace runs, word-character runs, punctuation/symbol runs.
_TOKEN_RE = re.compile(r"\s+|\w+|[^\w\s]+", re.UNICODE)
_WORD_RE = re.compile(r"\w+", re.UNICODE)


@dataclass(frozen=True)
class Token:
    """One tokenizer span. Concatenating surfaces in order reproduces the input."""

    surface: str
    is_word: bool
    start: int  # byte offset in the UTF-8 encoding of the input
    end: int


def tokenize(text: str) -> list[Token]:
    """Split text into word tokens and whitespace/punctuation separators.

    The split is lossless: ``"".join(t.surface for t in tokens) == text``.
    """
    tokens: list[Token] = []
    byte_pos = 0
    for match in _TOKEN_RE.finditer(text):
        surface = match.group()
        nbytes = len(surface.encode("utf-8"))
        tokens.append(
            Token(
                surface=surface,
                is_word=_WORD_RE.fullmatch(surface) is not None,
                start=byte_pos,
                end=byte_pos + nbytes,
            )
        )
        byte_pos += nbytes
    return tokens


def word_tokens(text: str) -> list[str]:
    """Just the word-token surfaces, in order."""
    return [t.surface for t in tokenize(text) if t.is_word]


def word_types(text: str) -> set[str]:
    """Distinct case-folded word tokens."""
    return {t.surface.casefold() for t in tokenize(text) if t.is_word}
