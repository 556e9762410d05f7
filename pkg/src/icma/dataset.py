"""Dataset emission: retrieval -> random-walk selection -> reversal ->
rendering -> JSON lines.

Strategies bind the train split once (queries from validation/test search
only that split; train queries always exclude themselves) and share one
output contract, so the emission loop is strategy-agnostic. Every record's
randomness is keyed by its id, which makes output bytes independent of
worker count and iteration order.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Protocol

from .chem import ChemError, parse_smiles
from .corpus import CorpusRecord
from .fingerprints import FingerprintVector, morgan_fingerprint
from .prompts import PromptBundle, count_units, render_prompt, truncate_to_cutoff
from .rerank import RandomWalkConfig, select_with_padding, sequence_reverse
from .retrieval import (
    Bm25Index,
    EmbeddingStore,
    RankedList,
    RetrievalError,
    bm25_topn,
    build_bm25_index,
    cosine_topn,
    fingerprint_topn,
)
from .rng import Xoshiro256StarStar

log = logging.getLogger(__name__)

STRATEGY_NAMES = ("bm25", "embedding", "fingerprint", "random")


class RetrievalStrategy(Protocol):
    name: str

    def topn(self, query: CorpusRecord, n: int, exclude_self: bool) -> RankedList: ...

    def record(self, record_id: str) -> CorpusRecord: ...


class _StrategyBase:
    def __init__(self, train_records: list[CorpusRecord]) -> None:
        if not train_records:
            raise RetrievalError("no train records to retrieve from")
        self._by_id = {r.id: r for r in train_records}
        self._train = train_records

    def record(self, record_id: str) -> CorpusRecord:
        return self._by_id[record_id]


class Bm25Strategy(_StrategyBase):
    """Caption retrieval: BM25 over train captions."""

    name = "bm25"

    def __init__(self, train_records: list[CorpusRecord], k1: float = 1.5,
                 b: float = 0.75, index: Bm25Index | None = None) -> None:
        super().__init__(train_records)
        self.index = index if index is not None else build_bm25_index(train_records, k1, b)

    def topn(self, query: CorpusRecord, n: int, exclude_self: bool) -> RankedList:
        return bm25_topn(self.index, query.caption, n,
                         exclude_id=query.id if exclude_self else None)


class EmbeddingStrategy(_StrategyBase):
    """Molecule graph retrieval: cosine over ingested embeddings."""

    name = "embedding"

    def __init__(self, train_records: list[CorpusRecord], store: EmbeddingStore) -> None:
        super().__init__(train_records)
        missing = [r.id for r in train_records if r.id not in store.vectors]
        if missing:
            raise RetrievalError(
                f"embedding store lacks vectors for {len(missing)} train records "
                f"(first: {missing[0]})")
        self.store = store
        self._train_ids = [r.id for r in train_records]

    def topn(self, query: CorpusRecord, n: int, exclude_self: bool) -> RankedList:
        candidates = self._train_ids
        if query.id not in self.store.vectors:
            raise RetrievalError(f"no embedding for query record {query.id!r}")
        return cosine_topn(self.store, query.id, n, exclude_self=exclude_self,
                           candidate_ids=candidates)


class FingerprintStrategy(_StrategyBase):
    """Molecule retrieval: Dice over Morgan fingerprints."""

    name = "fingerprint"

    def __init__(self, train_records: list[CorpusRecord], radius: int = 2,
                 width: int = 2048) -> None:
        super().__init__(train_records)
        self.radius = radius
        self.width = width
        self._fps: dict[str, FingerprintVector] = {
            r.id: morgan_fingerprint(parse_smiles(r.smiles), radius, width)
            for r in train_records
        }

    def topn(self, query: CorpusRecord, n: int, exclude_self: bool) -> RankedList:
        return fingerprint_topn(self._train, query.smiles, n,
                                exclude_id=query.id if exclude_self else None,
                                radius=self.radius, width=self.width,
                                precomputed=self._fps)


class RandomStrategy(_StrategyBase):
    """Baseline: a seeded, per-query random sample of the train split."""

    name = "random"

    def __init__(self, train_records: list[CorpusRecord], seed: int = 0) -> None:
        super().__init__(train_records)
        self.seed = seed
        self._sorted_ids = sorted(self._by_id)

    def topn(self, query: CorpusRecord, n: int, exclude_self: bool) -> RankedList:
        ids = self._sorted_ids
        available = len(ids) - (1 if exclude_self and query.id in self._by_id else 0)
        take = min(n, available)
        rng = Xoshiro256StarStar.for_stream(self.seed, "random-retrieval:" + query.id)
        picked: list[str] = []
        if take * 2 >= len(ids):
            pool = [rid for rid in ids if not (exclude_self and rid == query.id)]
            for k in range(take):  # partial Fisher-Yates
                j = k + rng.next_u64() % (len(pool) - k)
                pool[k], pool[j] = pool[j], pool[k]
            picked = pool[:take]
        else:
            seen: set[str] = set()
            while len(picked) < take:  # rejection sampling, O(n) expected
                rid = ids[rng.next_u64() % len(ids)]
                if rid in seen or (exclude_self and rid == query.id):
                    continue
                seen.add(rid)
                picked.append(rid)
        entries = tuple((rid, float(take - k) / take) for k, rid in enumerate(picked))
        return RankedList(entries=entries)


def make_strategy(name: str, train_records: list[CorpusRecord], *,
                  k1: float = 1.5, b: float = 0.75, seed: int = 0,
                  store: EmbeddingStore | None = None,
                  index: Bm25Index | None = None) -> RetrievalStrategy:
    if name == "bm25":
        return Bm25Strategy(train_records, k1=k1, b=b, index=index)
    if name == "embedding":
        if store is None:
            raise RetrievalError("embedding strategy needs an embedding store")
        return EmbeddingStrategy(train_records, store)
    if name == "fingerprint":
        return FingerprintStrategy(train_records)
    if name == "random":
        return RandomStrategy(train_records, seed=seed)
    raise ValueError(f"strategy must be one of {STRATEGY_NAMES}, got {name!r}")


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

@dataclass
class EmissionStats:
    records_total: int = 0
    records_emitted: int = 0
    records_skipped: int = 0
    early_stops: int = 0
    truncated_examples: int = 0
    no_candidate_records: int = 0
    mean_context_units: float = 0.0
    counter: str = "whitespace-words"
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, sort_keys=True)


def _orient(record: CorpusRecord, task: str) -> tuple[str, str]:
    if task == "mol2cap":
        return record.smiles, record.caption
    return record.caption, record.smiles


def build_record_row(record: CorpusRecord, strategy: RetrievalStrategy,
                     cfg: RandomWalkConfig, task: str, cutoff: int | None,
                     counter: str) -> tuple[dict, PromptBundle]:
    """Assemble one dataset row; raises on per-record retrieval errors."""
    rough = strategy.topn(record, cfg.N, exclude_self=(record.split == "train"))
    outcome = select_with_padding(rough, cfg, stream_id=record.id)

    def resolver(rid: str) -> tuple[str, str]:
        return _orient(strategy.record(rid), task)

    examples = sequence_reverse(outcome, resolver)
    query_input, query_target = _orient(record, task)
    bundle = render_prompt(task, examples, query_input,
                           query_target if record.split == "train" else None)
    truncated = 0
    if cutoff is not None:
        fitted = truncate_to_cutoff(bundle, cutoff, counter)
        truncated = len(bundle.examples) - len(fitted.examples)
        bundle = fitted

    row = {
        "id": record.id,
        "task": task,
        "rendered": bundle.rendered,
        "segments": [{"label": s.label, "start": s.start, "end": s.end}
                     for s in bundle.segments],
        "selected_ranks": [rank for rank, _ in outcome.selected],
        "early_stopped": outcome.early_stopped,
        "truncated_examples": truncated,
    }
    return row, bundle


def emit_dataset(queries: list[CorpusRecord], strategy: RetrievalStrategy,
                 cfg: RandomWalkConfig, task: str, out_path: str | Path,
                 cutoff: int | None = None, counter: str = "whitespace-words",
                 workers: int = 1, config_echo: dict | None = None) -> EmissionStats:
    """Write one JSON object per query record to ``out_path``.

    Records whose retrieval fails are logged and skipped (counted in the
    stats); output order follows the input record order regardless of the
    worker count.
    """
    stats = EmissionStats(records_total=len(queries), counter=counter,
                          config=dict(config_echo or {}))

    def build(record: CorpusRecord):
        try:
            return build_record_row(record, strategy, cfg, task, cutoff, counter)
        except (ChemError, RetrievalError, KeyError) as exc:
            log.warning("record %s skipped: %s", record.id, exc)
            return exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(build, queries))
    else:
        results = [build(r) for r in queries]

    unit_total = 0
    with Path(out_path).open("w", encoding="utf-8") as fh:
        for result in results:
            if isinstance(result, Exception):
                stats.records_skipped += 1
                continue
            row, bundle = result
            stats.records_emitted += 1
            stats.early_stops += 1 if row["early_stopped"] else 0
            stats.truncated_examples += row["truncated_examples"]
            if not row["selected_ranks"]:
                stats.no_candidate_records += 1
            unit_total += count_units(bundle.rendered, counter)
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    if stats.records_emitted:
        stats.mean_context_units = unit_total / stats.records_emitted
    return stats
