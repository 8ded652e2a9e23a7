"""Shared plumbing: stable hashing, parse errors, key=value report blocks."""

from __future__ import annotations

import hashlib
from typing import Iterable, Mapping


class ParseError(ValueError):
    """Malformed input file. Carries the 1-based line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def stable_hash64(*parts) -> int:
    """Hash a tuple of ints/strings to a 64-bit integer.

    Stable across runs, machines and processes (unlike built-in ``hash``),
    which is what makes seeded sampling order- and parallelism-independent.
    Each part is length-prefixed so that ("ab", "c") != ("a", "bc").
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, int):
            data = part.to_bytes(8, "big", signed=True)
        else:
            data = str(part).encode("utf-8")
        h.update(len(data).to_bytes(4, "big"))
        h.update(data)
    return int.from_bytes(h.digest(), "big")


def uniform01(*parts) -> float:
    """Map a hash of the parts to a float in [0, 1)."""
    return stable_hash64(*parts) / 2.0**64


def format_kv_block(values: Mapping[str, object]) -> str:
    """Render a machine-readable key=value block, one pair per line."""
    return "".join(f"{key}={value}\n" for key, value in values.items())


def format_table(rows: Iterable[Iterable[object]], header: Iterable[str]) -> str:
    """Render rows as aligned-column text with a header line."""
    header = [str(h) for h in header]
    cells = [[str(c) for c in row] for row in rows]
    widths = [len(h) for h in header]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
