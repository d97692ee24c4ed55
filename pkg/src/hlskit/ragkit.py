"""Two-stage retrieval: chunk, embed, cosine top-k, rerank, top-m.

Documents are tiled into byte-windowed chunks (boundaries never split a
multi-byte character). A pluggable embedder turns text into unit vectors
held in an exact full-scan index; first-stage retrieval ranks by cosine,
a pluggable reranker reorders the candidates, and the top m survive. The
built-in test embedder hashes token counts into a fixed number of buckets
with a stable hash, so every ranking is reproducible across runs and
platforms.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

__all__ = [
    "Chunk",
    "RetrievalConfig",
    "RetrievalStageError",
    "chunk_document",
    "Embedder",
    "HashedTokenEmbedder",
    "CommandEmbedder",
    "Reranker",
    "CosineReranker",
    "TokenOverlapReranker",
    "CommandReranker",
    "VectorIndex",
    "two_stage_query",
]

INDEX_FORMAT = "hlskit-index"
INDEX_VERSION = 1


class RetrievalStageError(RuntimeError):
    """A retrieval stage failed; .stage is 1 (cosine) or 2 (rerank)."""

    def __init__(self, stage: int, message: str) -> None:
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    chunk_index: int
    byte_offset: int
    text: str

    def sort_key(self) -> tuple[str, int]:
        return (self.doc_id, self.chunk_index)


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 20  # first-stage candidates
    m: int = 5  # final count
    window_bytes: int = 2048
    stride_bytes: int = 1024

    def __post_init__(self) -> None:
        if not 1 <= self.m <= self.k:
            raise ValueError("need 1 <= m <= k")
        if self.window_bytes < 1 or not 1 <= self.stride_bytes <= self.window_bytes:
            raise ValueError("need window >= 1 and 1 <= stride <= window")


def chunk_document(doc_id: str, text: str, window: int, stride: int) -> list[Chunk]:
    """Tile text into byte windows at stride intervals.

    The final partial window is included and boundaries are snapped
    backwards to character starts so no multi-byte encoding is split.
    """
    if window < 1 or not 1 <= stride <= window:
        raise ValueError("need window >= 1 and 1 <= stride <= window")
    data = text.encode("utf-8")
    if not data:
        return []
    starts = []
    pos = 0
    for ch in text:
        starts.append(pos)
        pos += len(ch.encode("utf-8"))
    starts.append(len(data))
    start_set = set(starts)

    def snap_down(b: int) -> int:
        while b not in start_set:
            b -= 1
        return b

    def next_start(b: int) -> int:
        while b not in start_set:
            b += 1
        return b

    chunks: list[Chunk] = []
    prev_begin = -1
    offset = 0
    while offset < len(data):
        begin = snap_down(offset)
        end = snap_down(min(offset + window, len(data)))
        if end <= begin:  # window narrower than one character: still make progress
            end = next_start(begin + 1)
        if begin != prev_begin:
            chunks.append(
                Chunk(
                    doc_id=doc_id,
                    chunk_index=len(chunks),
                    byte_offset=begin,
                    text=data[begin:end].decode("utf-8"),
                )
            )
            prev_begin = begin
        offset += stride
    return chunks


# ---------------------------------------------------------------------------
# Embedders and rerankers
# ---------------------------------------------------------------------------


class Embedder(Protocol):
    dimension: int

    def embed(self, text: str) -> np.ndarray:
        """Unit-normalized vector of length `dimension`."""


_TOKEN_RE = re.compile(r"\w+")


def _stable_bucket(token: str, dimension: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dimension


class HashedTokenEmbedder:
    """Deterministic test embedder: token counts folded into d buckets."""

    def __init__(self, dimension: int = 256) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        v = np.zeros(self.dimension, dtype=np.float64)
        for token in _TOKEN_RE.findall(text.lower()):
            v[_stable_bucket(token, self.dimension)] += 1.0
        norm = float(np.linalg.norm(v))
        if norm > 0:
            v /= norm
        return v


class CommandEmbedder:
    """Embedder as a subprocess: one JSON line of input text per call on
    stdin, one JSON vector per line on stdout."""

    def __init__(self, command: Sequence[str] | str, dimension: int) -> None:
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self.dimension = dimension

    def embed(self, text: str) -> np.ndarray:
        proc = subprocess.run(self.argv, input=json.dumps(text) + "\n", capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(f"embedder command exited {proc.returncode}: {proc.stderr.strip()}")
        values = json.loads(proc.stdout.strip().splitlines()[0])
        v = np.asarray(values, dtype=np.float64)
        if v.shape != (self.dimension,):
            raise ValueError(f"embedder returned shape {v.shape}, expected ({self.dimension},)")
        norm = float(np.linalg.norm(v))
        if norm > 0:
            v = v / norm
        return v


class Reranker(Protocol):
    def score(self, query_text: str, candidates: Sequence[tuple[Chunk, float]]) -> list[float]:
        """Relevance score per candidate; higher is better."""


class CosineReranker:
    """Identity reranker: keeps the first-stage cosine scores."""

    def score(self, query_text: str, candidates: Sequence[tuple[Chunk, float]]) -> list[float]:
        return [cosine for _, cosine in candidates]


class TokenOverlapReranker:
    """Query-coverage overlap: the fraction of query tokens present in the
    chunk. Rewards lexically exact candidates over cosine-close
    paraphrases that miss query terms."""

    def score(self, query_text: str, candidates: Sequence[tuple[Chunk, float]]) -> list[float]:
        q = set(_TOKEN_RE.findall(query_text.lower()))
        scores = []
        for chunk, _ in candidates:
            c = set(_TOKEN_RE.findall(chunk.text.lower()))
            scores.append(len(q & c) / len(q) if q else 0.0)
        return scores


class CommandReranker:
    """Reranker as a subprocess: stdin gets one JSON line {query, texts};
    stdout must be a JSON list of scores."""

    def __init__(self, command: Sequence[str] | str) -> None:
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)

    def score(self, query_text: str, candidates: Sequence[tuple[Chunk, float]]) -> list[float]:
        payload = json.dumps({"query": query_text, "texts": [c.text for c, _ in candidates]})
        proc = subprocess.run(self.argv, input=payload + "\n", capture_output=True, text=True)
        if proc.returncode != 0:
            raise RuntimeError(f"reranker command exited {proc.returncode}: {proc.stderr.strip()}")
        scores = json.loads(proc.stdout.strip().splitlines()[0])
        if len(scores) != len(candidates):
            raise ValueError(f"reranker returned {len(scores)} scores for {len(candidates)} candidates")
        return [float(s) for s in scores]


# ---------------------------------------------------------------------------
# Index
# ---------------------------------------------------------------------------


class VectorIndex:
    """Exact full-scan cosine index over unit vectors."""

    def __init__(self, dimension: int) -> None:
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.chunks: list[Chunk] = []
        self._vectors: list[np.ndarray] = []

    def __len__(self) -> int:
        return len(self.chunks)

    def add(self, chunks: Sequence[Chunk], embedder: Embedder) -> None:
        if embedder.dimension != self.dimension:
            raise ValueError(
                f"embedder dimension {embedder.dimension} != index dimension {self.dimension}"
            )
        for chunk in chunks:
            v = embedder.embed(chunk.text)
            if v.shape != (self.dimension,):
                raise ValueError(f"vector shape {v.shape} != ({self.dimension},)")
            self.chunks.append(chunk)
            self._vectors.append(np.asarray(v, dtype=np.float64))

    def retrieve(self, query_text: str, embedder: Embedder, k: int) -> list[tuple[Chunk, float]]:
        """Top-k chunks by cosine, ties broken by (doc_id, chunk_index)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if embedder.dimension != self.dimension:
            raise ValueError(
                f"embedder dimension {embedder.dimension} != index dimension {self.dimension}"
            )
        if not self.chunks:
            return []
        q = embedder.embed(query_text)
        matrix = np.vstack(self._vectors)
        scores = np.clip(matrix @ q, -1.0, 1.0)
        order = sorted(range(len(self.chunks)), key=lambda i: (-scores[i], *self.chunks[i].sort_key()))
        return [(self.chunks[i], float(scores[i])) for i in order[:k]]

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {"format": INDEX_FORMAT, "version": INDEX_VERSION, "dimension": self.dimension}
                )
                + "\n"
            )
            for chunk, vec in zip(self.chunks, self._vectors):
                fh.write(
                    json.dumps(
                        {
                            "doc_id": chunk.doc_id,
                            "chunk_index": chunk.chunk_index,
                            "offset": chunk.byte_offset,
                            "text": chunk.text,
                            "vector": vec.tolist(),
                        }
                    )
                    + "\n"
                )

    @classmethod
    def load(cls, path: str | os.PathLike) -> "VectorIndex":
        with open(path, "r", encoding="utf-8") as fh:
            header_line = fh.readline().strip()
            if not header_line:
                raise ValueError(f"{path}: empty index file")
            header = json.loads(header_line)
            if header.get("format") != INDEX_FORMAT:
                raise ValueError(f"{path}: not a {INDEX_FORMAT} file")
            if header.get("version") != INDEX_VERSION:
                raise ValueError(f"{path}: unsupported version {header.get('version')}")
            index = cls(dimension=int(header["dimension"]))
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                index.chunks.append(
                    Chunk(
                        doc_id=rec["doc_id"],
                        chunk_index=int(rec["chunk_index"]),
                        byte_offset=int(rec["offset"]),
                        text=rec["text"],
                    )
                )
                v = np.asarray(rec["vector"], dtype=np.float64)
                if v.shape != (index.dimension,):
                    raise ValueError(f"{path}: vector of dimension {v.shape} in a {index.dimension}-d index")
                index._vectors.append(v)
        return index


def two_stage_query(
    index: VectorIndex,
    query_text: str,
    embedder: Embedder,
    reranker: Reranker,
    config: RetrievalConfig,
) -> list[tuple[Chunk, float]]:
    """Cosine top-k, then rerank and keep the top m.

    Returned scores are the reranker's; ordering is by descending score
    with (doc_id, chunk_index) tie-breaks. Stage failures raise
    RetrievalStageError naming the stage.
    """
    try:
        candidates = index.retrieve(query_text, embedder, config.k)
    except Exception as exc:
        raise RetrievalStageError(1, str(exc)) from exc
    if not candidates:
        return []
    try:
        scores = reranker.score(query_text, candidates)
    except Exception as exc:
        raise RetrievalStageError(2, str(exc)) from exc
    if len(scores) != len(candidates):
        raise RetrievalStageError(2, f"got {len(scores)} scores for {len(candidates)} candidates")
    ranked = sorted(
        zip(candidates, scores),
        key=lambda pair: (-pair[1], *pair[0][0].sort_key()),
    )
    return [(chunk, float(score)) for (chunk, _cos), score in ranked[: config.m]]
