"""Rough top-N retrieval over a molecule-caption corpus.

Three rankers share one output contract (RankedList): BM25 over captions,
cosine over ingested molecule-graph embeddings, and Dice over Morgan
fingerprints. Scores sort descending with ties broken by ascending record
id, so every ranking is total and reproducible.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chem import parse_smiles
from .corpus import CorpusRecord
from .fingerprints import FingerprintVector, dice, morgan_fingerprint


class RetrievalError(ValueError):
    """Base class for retrieval failures."""


class EmptyCorpusError(RetrievalError):
    """No records available to index."""


class EmbeddingFormatError(RetrievalError):
    """Embedding file violates the `dim=` header contract."""


class NonFiniteError(RetrievalError):
    """Embedding vector contains NaN or infinity."""


class UnknownIdError(RetrievalError):
    """Query id not present in the store/index."""


class ZeroVectorError(RetrievalError):
    """Cosine similarity is undefined for a zero-norm vector."""


# ---------------------------------------------------------------------------
# ranked lists
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RankedList:
    """Ordered (record-id, score) pairs, score descending then id ascending."""

    entries: tuple[tuple[str, float], ...]

    def __len__(self) -> int:
        return len(self.entries)

    def ids(self) -> list[str]:
        return [rid for rid, _ in self.entries]

    def validate(self) -> None:
        seen = set()
        for (id_a, s_a), (id_b, s_b) in zip(self.entries, self.entries[1:]):
            if (-s_a, id_a) >= (-s_b, id_b):
                raise AssertionError("entries not strictly sorted")
        for rid, _ in self.entries:
            if rid in seen:
                raise AssertionError(f"duplicate id {rid}")
            seen.add(rid)


def _top_n(scores: dict[str, float], n: int, exclude: str | None) -> RankedList:
    items = [(rid, s) for rid, s in scores.items() if rid != exclude]
    items.sort(key=lambda t: (-t[1], t[0]))
    return RankedList(entries=tuple(items[:n]))


# ---------------------------------------------------------------------------
# BM25 caption retrieval
# ---------------------------------------------------------------------------

# lowercase tokens; hyphenated chemical names ("2-hydroxy") stay whole
_TOKEN_RE = re.compile(r"[a-z0-9-]+")


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.findall(text.lower()) if t.strip("-")]


@dataclass
class Bm25Index:
    """Inverted caption index with BM25 statistics."""

    k1: float
    b: float
    n_docs: int
    avgdl: float
    doc_len: dict[str, int]
    postings: dict[str, list[tuple[str, int]]] = field(repr=False)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        if df == 0:
            return 0.0
        return max(0.0, math.log((self.n_docs - df + 0.5) / (df + 0.5)))


def build_bm25_index(records: list[CorpusRecord], k1: float = 1.5,
                     b: float = 0.75) -> Bm25Index:
    """Index the captions of the train split.

    k1 must be positive and b in [0, 1]; both default to the common
    literature values.
    """
    if not k1 > 0:
        raise ValueError(f"k1 must be > 0, got {k1}")
    if not 0 <= b <= 1:
        raise ValueError(f"b must be in [0, 1], got {b}")
    train = [r for r in records if r.split == "train"]
    if not train:
        raise EmptyCorpusError("no train records to index")

    doc_len: dict[str, int] = {}
    postings: dict[str, list[tuple[str, int]]] = {}
    for rec in train:
        tokens = tokenize(rec.caption)
        doc_len[rec.id] = len(tokens)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            postings.setdefault(tok, []).append((rec.id, tf))

    n_docs = len(train)
    avgdl = sum(doc_len.values()) / n_docs
    return Bm25Index(k1=k1, b=b, n_docs=n_docs, avgdl=avgdl,
                     doc_len=doc_len, postings=postings)


def bm25_scores(index: Bm25Index, query_caption: str) -> dict[str, float]:
    """BM25 score of every indexed document against the query.

    Query terms are summed as they occur (a repeated term contributes each
    time), mirroring a sum over the i-th query term.
    """
    scores: dict[str, float] = {}
    for term in tokenize(query_caption):
        idf = index.idf(term)
        if idf == 0.0:
            continue
        for rec_id, tf in index.postings.get(term, ()):
            norm = index.k1 * (1 - index.b + index.b * index.doc_len[rec_id] / index.avgdl)
            scores[rec_id] = scores.get(rec_id, 0.0) + idf * tf * (index.k1 + 1) / (tf + norm)
    return scores


def bm25_topn(index: Bm25Index, query_caption: str, n: int,
              exclude_id: str | None = None) -> RankedList:
    """Top-n records by BM25. Zero-score records are dropped unless fewer
    than n positives exist; then they fill the tail in ascending id order."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    scores = bm25_scores(index, query_caption)
    positives = {rid: s for rid, s in scores.items() if s > 0.0}
    ranked = _top_n(positives, n, exclude_id)
    if len(ranked) < n:
        fill = [rid for rid in sorted(index.doc_len)
                if rid not in positives and rid != exclude_id]
        entries = list(ranked.entries)
        entries.extend((rid, 0.0) for rid in fill[: n - len(ranked)])
        ranked = RankedList(entries=tuple(entries))
    return ranked


def save_bm25_index(index: Bm25Index, path: str | Path) -> None:
    payload = {
        "format": "icma-bm25-index", "version": 1,
        "k1": index.k1, "b": index.b, "n_docs": index.n_docs,
        "avgdl": index.avgdl, "doc_len": index.doc_len,
        "postings": {t: [[rid, tf] for rid, tf in plist]
                     for t, plist in index.postings.items()},
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, sort_keys=True),
                          encoding="utf-8")


def load_bm25_index(path: str | Path) -> Bm25Index:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RetrievalError(f"{path}: not a BM25 index file ({exc})") from exc
    if payload.get("format") != "icma-bm25-index":
        raise RetrievalError(f"{path}: not a BM25 index file")
    return Bm25Index(
        k1=payload["k1"], b=payload["b"], n_docs=payload["n_docs"],
        avgdl=payload["avgdl"], doc_len=payload["doc_len"],
        postings={t: [(rid, tf) for rid, tf in plist]
                  for t, plist in payload["postings"].items()},
    )


# ---------------------------------------------------------------------------
# embedding (molecule graph) retrieval
# ---------------------------------------------------------------------------

@dataclass
class EmbeddingStore:
    """Ingested molecule-graph embeddings, one vector per record id."""

    dim: int
    vectors: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.vectors)


def load_embeddings(path: str | Path) -> EmbeddingStore:
    """Read the embedding file format: ``dim=<k>`` header, then
    ``id<TAB>v1,v2,...,vk`` rows with decimal floats."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("dim="):
            raise EmbeddingFormatError(f"{path}: first line must be 'dim=<k>', got {header!r}")
        try:
            dim = int(header[4:])
        except ValueError as exc:
            raise EmbeddingFormatError(f"{path}: bad dimension {header!r}") from exc
        if dim < 1:
            raise EmbeddingFormatError(f"{path}: dimension must be >= 1")

        vectors: dict[str, np.ndarray] = {}
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                rec_id, payload = line.split("\t")
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{line_no}: expected 'id<TAB>floats'") from exc
            try:
                vec = np.array([float(x) for x in payload.split(",")], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(f"{path}:{line_no}: bad float") from exc
            if vec.shape[0] != dim:
                raise EmbeddingFormatError(
                    f"{path}:{line_no}: row has dim {vec.shape[0]}, header says {dim}")
            if not np.isfinite(vec).all():
                raise NonFiniteError(f"{path}:{line_no}: non-finite component")
            vectors[rec_id] = vec
    return EmbeddingStore(dim=dim, vectors=vectors)


def save_embeddings(store: EmbeddingStore, path: str | Path) -> None:
    """Write a store back out; floats use repr so reloads are bit-exact."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"dim={store.dim}\n")
        for rec_id, vec in store.vectors.items():
            fh.write(rec_id + "\t" + ",".join(repr(float(x)) for x in vec) + "\n")


def cosine_topn(store: EmbeddingStore, query_id: str, n: int,
                exclude_self: bool = True,
                candidate_ids: list[str] | None = None) -> RankedList:
    """Top-n records by cosine similarity to the query record's vector."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if query_id not in store.vectors:
        raise UnknownIdError(f"query id {query_id!r} not in embedding store")
    q = store.vectors[query_id]
    qn = float(np.linalg.norm(q))
    if qn == 0.0:
        raise ZeroVectorError(f"query vector {query_id!r} has zero norm")

    scores: dict[str, float] = {}
    ids = candidate_ids if candidate_ids is not None else store.vectors.keys()
    for rec_id in ids:
        if rec_id not in store.vectors:
            raise UnknownIdError(f"candidate id {rec_id!r} not in embedding store")
        v = store.vectors[rec_id]
        vn = float(np.linalg.norm(v))
        if vn == 0.0:
            raise ZeroVectorError(f"candidate vector {rec_id!r} has zero norm")
        scores[rec_id] = float(np.dot(q, v)) / (qn * vn)
    return _top_n(scores, n, query_id if exclude_self else None)


# ---------------------------------------------------------------------------
# fingerprint retrieval
# ---------------------------------------------------------------------------

def fingerprint_topn(records: list[CorpusRecord], query_smiles: str, n: int,
                     exclude_id: str | None = None, radius: int = 2,
                     width: int = 2048,
                     precomputed: dict[str, FingerprintVector] | None = None) -> RankedList:
    """Top-n records by Dice similarity of Morgan fingerprints."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    query_fp = morgan_fingerprint(parse_smiles(query_smiles), radius, width)
    scores: dict[str, float] = {}
    for rec in records:
        fp = precomputed.get(rec.id) if precomputed else None
        if fp is None:
            fp = morgan_fingerprint(parse_smiles(rec.smiles), radius, width)
        scores[rec.id] = dice(query_fp, fp)
    return _top_n(scores, n, exclude_id)
