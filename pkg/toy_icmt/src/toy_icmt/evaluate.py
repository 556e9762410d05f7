"""Greedy-decoding evaluation: exact match on the generation slot."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch

from .model import TinyCausalLM
from .records import PromptRecord, Vocab


@dataclass
class EvalResult:
    exact_match: float
    total: int
    hits: int
    predictions: dict[str, str]

    def to_json(self) -> str:
        return json.dumps({"exact_match": self.exact_match, "total": self.total,
                           "hits": self.hits, "predictions": self.predictions},
                          ensure_ascii=False, sort_keys=True)


def generation_prefix(record: PromptRecord) -> str:
    """Prompt text up to the generation slot.

    Inference prompts end at the slot already; training-split prompts carry
    the target, which is stripped here.
    """
    span = record.target_span()
    if span is None:
        return record.rendered
    return record.rendered[: span[0]]


@torch.no_grad()
def eval_toy(model: TinyCausalLM, vocab: Vocab, records: list[PromptRecord],
             gold: dict[str, str], max_new: int = 24) -> EvalResult:
    """Exact-match fraction of greedy decodes against gold targets."""
    model.eval()
    hits = 0
    predictions: dict[str, str] = {}
    known = {c: True for c in vocab.chars}
    for record in records:
        prefix_text = generation_prefix(record)
        if any(c not in known for c in prefix_text):
            predictions[record.id] = ""
            continue
        prefix = [vocab.bos_id] + vocab.encode(prefix_text)
        generated = model.greedy_decode(prefix, vocab.eos_id, max_new=max_new)
        text = vocab.decode(generated)
        text = text.split("\n", 1)[0]  # a newline also ends the molecule slot
        predictions[record.id] = text
        if text == gold.get(record.id):
            hits += 1
    total = len(records)
    return EvalResult(exact_match=hits / total if total else 0.0,
                      total=total, hits=hits, predictions=predictions)


def load_gold_targets(corpus_tsv: str | Path) -> dict[str, str]:
    """Gold molecule per record id from an engine corpus file."""
    gold: dict[str, str] = {}
    with Path(corpus_tsv).open(encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("id\t"):
            raise ValueError(f"{corpus_tsv}: not a corpus TSV")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            rec_id, smiles, _caption = line.split("\t", 2)
            gold[rec_id] = smiles
    return gold
