"""Reading the context engine's JSONL dataset format into trainable records.

Each dataset row carries the rendered prompt plus byte-offset loss segments.
The corpus here is ASCII-only and tokenization is per character, so byte
offsets equal character and token offsets, and the engine's midpoint
attribution rule degenerates to plain byte membership.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

BOS = "\x02"
EOS = "\x03"
PAD = "\x00"


@dataclass(frozen=True)
class Vocab:
    chars: str

    @property
    def size(self) -> int:
        return len(self.chars)

    def encode(self, text: str) -> list[int]:
        index = {c: i for i, c in enumerate(self.chars)}
        return [index[c] for c in text]

    def decode(self, ids: list[int]) -> str:
        return "".join(self.chars[i] for i in ids)

    @classmethod
    def build(cls, texts: list[str]) -> "Vocab":
        charset = set()
        for text in texts:
            charset.update(text)
        for special in (BOS, EOS, PAD):
            charset.discard(special)
        return cls(chars=PAD + BOS + EOS + "".join(sorted(charset)))

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def bos_id(self) -> int:
        return 1

    @property
    def eos_id(self) -> int:
        return 2


@dataclass(frozen=True)
class PromptRecord:
    """One dataset row: rendered text plus per-byte segment labels."""

    id: str
    rendered: str
    segments: tuple[tuple[int, int, str], ...]  # (start, end, label)

    def char_labels(self) -> list[str]:
        labels = [""] * len(self.rendered)
        for start, end, label in self.segments:
            for i in range(start, end):
                labels[i] = label
        return labels

    def active_mask(self, mode: str) -> list[bool]:
        """Per-character loss mask for a masking mode (sft or icma)."""
        def active(label: str) -> bool:
            if label == "query_target":
                return True
            return mode == "icma" and label.startswith("context_target_")

        return [active(label) for label in self.char_labels()]

    def target_span(self) -> tuple[int, int] | None:
        for start, end, label in self.segments:
            if label == "query_target":
                return start, end
        return None


def load_records(path: str | Path) -> list[PromptRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            if len(row["rendered"].encode("utf-8")) != len(row["rendered"]):
                raise ValueError(f"record {row['id']}: prompt is not ASCII-safe, "
                                 "byte offsets would diverge from char offsets")
            records.append(PromptRecord(
                id=str(row["id"]),
                rendered=row["rendered"],
                segments=tuple((s["start"], s["end"], s["label"])
                               for s in row["segments"])))
    return records
