"""Aligned word-embedding spaces and nearest-neighbor lexicon induction.

Spaces are loaded from word2vec text files (optional ``count dim`` header,
then one ``term v1 ... vd`` line per entry). Vectors are unit-normalized at
load so cosine similarity reduces to a dot product; all similarity scores
are computed in float64 regardless of the float32 storage, which keeps the
argmax identical between the blocked matrix kernel and a naive per-term
scan.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lexicon import BilingualLexicon
from .util import ParseError


@dataclass
class EmbeddingSpace:
    """Vocabulary plus one dense row vector per term, for one language."""

    language: str
    vocab: list[str]
    vectors: np.ndarray  # (n, dim), float32 storage
    index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        if self.vectors.ndim != 2 or len(self.vocab) != self.vectors.shape[0]:
            raise ValueError("vocab and vector rows out of sync")
        self.index = {}
        for i, term in enumerate(self.vocab):
            if term in self.index:
                raise ValueError(f"duplicate term in vocabulary: {term!r}")
            self.index[term] = i

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def row(self, term: str) -> np.ndarray:
        try:
            return self.vectors[self.index[term]]
        except KeyError:
            raise KeyError(f"term not in vocabulary: {term!r}") from None


@dataclass
class NeighborResult:
    """Top-k targets for one source term, sorted by cosine descending.

    Ties are broken by target vocabulary order, so the sequence is fully
    deterministic.
    """

    term: str
    neighbors: list[tuple[str, float]]


def _looks_like_header(parts: list[str]) -> bool:
    if len(parts) != 2:
        return False
    try:
        int(parts[0]), int(parts[1])
    except ValueError:
        return False
    return True


def load_embeddings(path, limit: int | None = None, language: str = "") -> EmbeddingSpace:
    """Read a word2vec text file into an EmbeddingSpace.

    The optional header line is auto-detected (exactly two integer tokens).
    Duplicate terms keep their first occurrence; `limit` caps the vocabulary
    reading top-of-file first. Malformed lines abort the load: silently
    skipping them would corrupt induced lexicons invisibly.
    """
    if limit is not None and limit <= 0:
        raise ValueError("limit must be positive")
    vocab: list[str] = []
    seen: set[str] = set()
    rows: list[np.ndarray] = []
    dim = None
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            parts = line.rstrip("\n").split(" ")
            parts = [p for p in parts if p]
            if not parts:
                continue
            if line_no == 1 and _looks_like_header(parts):
                continue
            term, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise ParseError(path, line_no, "no vector components on first data line")
            if len(values) != dim:
                raise ParseError(
                    path, line_no, f"expected {dim} vector components, found {len(values)}"
                )
            if term in seen:
                continue
            try:
                vector = np.asarray([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(path, line_no, f"bad vector component: {exc}") from None
            norm = float(np.linalg.norm(vector))
            if norm == 0.0:
                raise ValueError(f"{path}: zero-norm vector for term {term!r}")
            seen.add(term)
            vocab.append(term)
            rows.append((vector / norm).astype(np.float32))
            if limit is not None and len(vocab) >= limit:
                break
    if not vocab:
        raise ValueError(f"{path}: no embedding entries found")
    return EmbeddingSpace(language=language, vocab=vocab, vectors=np.vstack(rows))


def normalize(space: EmbeddingSpace) -> EmbeddingSpace:
    """Return a copy of the space with unit-normalized rows (float32 storage)."""
    matrix = space.vectors.astype(np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    if np.any(norms == 0.0):
        bad = space.vocab[int(np.argmin(norms))]
        raise ValueError(f"zero-norm vector for term {bad!r}")
    unit = (matrix / norms[:, None]).astype(np.float32)
    return EmbeddingSpace(language=space.language, vocab=list(space.vocab), vectors=unit)


def _unit64(matrix: np.ndarray) -> np.ndarray:
    """Unit-normalized float64 view of a vector matrix; rejects zero rows."""
    out = matrix.astype(np.float64)
    norms = np.linalg.norm(out, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero-norm vector row")
    return out / norms[:, None]


def cosine(u, v) -> float:
    """Cosine similarity of two vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def nearest_neighbors(
    src: EmbeddingSpace, tgt: EmbeddingSpace, term: str, k: int
) -> NeighborResult:
    """Top-k target terms by cosine against one source term's vector."""
    if k < 1:
        raise ValueError("k must be positive")
    if src.dim != tgt.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {tgt.dim}")
    if term not in src:
        raise KeyError(f"term not in source vocabulary: {term!r}")
    query = _unit64(src.row(term)[None, :])[0]
    scores = _unit64(tgt.vectors) @ query
    # Stable sort on negated scores: equal scores keep vocabulary order.
    order = np.argsort(-scores, kind="stable")[: min(k, len(tgt))]
    neighbors = [
        (tgt.vocab[int(i)], float(np.clip(scores[int(i)], -1.0, 1.0))) for i in order
    ]
    return NeighborResult(term=term, neighbors=neighbors)


def induce_lexicon(
    src: EmbeddingSpace, tgt: EmbeddingSpace, block_size: int = 1024
) -> BilingualLexicon:
    """Map every source term to its nearest target term by cosine.

    Works block-by-block over the source vocabulary so arbitrarily large
    spaces never materialize the full |src| x |tgt| score matrix. Each row's
    scores come from the same float64 matrix product regardless of
    `block_size`, so the induced mapping is byte-identical for any blocking
    and equals the naive per-term scan (argmax, lowest index on ties).
    """
    if src.dim != tgt.dim:
        raise ValueError(f"dimension mismatch: {src.dim} vs {tgt.dim}")
    if block_size < 1:
        raise ValueError("block_size must be positive")
    src_matrix = _unit64(src.vectors)
    tgt_matrix = _unit64(tgt.vectors)
    entries: dict[str, str] = {}
    for start in range(0, len(src), block_size):
        block = src_matrix[start : start + block_size]
        scores = block @ tgt_matrix.T
        best = np.argmax(scores, axis=1)  # first occurrence wins on ties
        for offset, tgt_idx in enumerate(best):
            key = src.vocab[start + offset].casefold()
            if key not in entries:
                entries[key] = tgt.vocab[int(tgt_idx)]
    return BilingualLexicon(src_lang=src.language, tgt_lang=tgt.language, entries=entries)
