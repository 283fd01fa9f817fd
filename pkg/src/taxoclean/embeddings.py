"""Word vectors in word2vec text format and the directional HyperVec score."""

from __future__ import annotations

import gzip
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Mapping

import numpy as np

from taxoclean.lexical import decompose_name, singularize
from taxoclean.stemmer import stem


class EmbeddingFormatError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    vectors: Mapping[str, np.ndarray]

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word)


def load_embeddings(stream: IO[str]) -> EmbeddingTable:
    """Parse ``count dim`` then ``word v1 .. vd`` lines.

    A repeated word keeps its last vector; the header count must equal the
    number of distinct words.
    """
    header = stream.readline()
    try:
        count, dim = (int(x) for x in header.split())
    except ValueError:
        raise EmbeddingFormatError("line 1: header must be 'count dim'") from None
    if count < 0 or dim <= 0:
        raise EmbeddingFormatError("line 1: count must be >= 0 and dim > 0")
    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(stream, start=2):
        parts = line.rstrip("\r\n").rstrip(" ").split(" ")
        if parts == [""]:
            continue
        word, comps = parts[0], parts[1:]
        if len(comps) != dim:
            raise EmbeddingFormatError(
                f"line {lineno}: expected {dim} components, got {len(comps)}"
            )
        try:
            vec = np.array([float(c) for c in comps], dtype=np.float64)
        except ValueError:
            raise EmbeddingFormatError(f"line {lineno}: non-numeric component") from None
        if not np.all(np.isfinite(vec)):
            raise EmbeddingFormatError(f"line {lineno}: non-finite component")
        vec.setflags(write=False)
        vectors[word.lower()] = vec
    if len(vectors) != count:
        raise EmbeddingFormatError(
            f"header declares {count} words, file has {len(vectors)} distinct words"
        )
    return EmbeddingTable(dim, vectors)


def load_embeddings_file(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    opener = gzip.open if path.name.endswith(".gz") else open
    with opener(path, "rt", encoding="utf-8") as fh:
        return load_embeddings(fh)


def write_embeddings(table: EmbeddingTable) -> str:
    lines = [f"{len(table)} {table.dim}\n"]
    for word in sorted(table.vectors):
        comps = " ".join(repr(float(x)) for x in table.vectors[word])
        lines.append(f"{word} {comps}\n")
    return "".join(lines)


def head_vector(table: EmbeddingTable, name: str) -> np.ndarray | None:
    """Vector of the stemmed head word, falling back to the singular head."""
    head = decompose_name(name).head.lower()
    for key in (stem(head), singularize(head), head):
        vec = table.get(key)
        if vec is not None:
            return vec
    return None


def hypervec_from_vectors(e1: np.ndarray, e2: np.ndarray) -> float | None:
    n1 = float(np.linalg.norm(e1))
    n2 = float(np.linalg.norm(e2))
    if n1 == 0.0 or n2 == 0.0:
        return None
    cosine = float(np.dot(e1, e2)) / (n1 * n2)
    return cosine * (n2 / n1)


def hypervec_score(table: EmbeddingTable, c1: str, c2: str) -> float | None:
    """cosine(E_h1, E_h2) * |E_h2| / |E_h1|; None when a head is unknown."""
    e1 = head_vector(table, c1)
    e2 = head_vector(table, c2)
    if e1 is None or e2 is None:
        return None
    score = hypervec_from_vectors(e1, e2)
    return None if score is None or math.isnan(score) else score
