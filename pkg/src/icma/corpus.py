"""Molecule-caption corpus loading.

Corpus files are UTF-8 TSV with header ``id<TAB>smiles<TAB>caption`` and one
record per line (the ChEBI-20 shape). Records with malformed rows or SMILES
the parser rejects are quarantined with a warning instead of crashing the
run; real corpora contain irregular rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from .chem import is_valid

log = logging.getLogger(__name__)

SPLITS = ("train", "validation", "test")


class CorpusFormatError(ValueError):
    """Structurally unreadable corpus file (bad header, not TSV)."""


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    smiles: str
    caption: str
    split: str


@dataclass(frozen=True)
class QuarantinedRow:
    line_no: int
    record_id: str | None
    reason: str


@dataclass
class Corpus:
    """Loaded records plus the rows that failed screening."""

    records: list[CorpusRecord]
    quarantined: list[QuarantinedRow] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.by_id: dict[str, CorpusRecord] = {}
        for rec in self.records:
            if rec.id in self.by_id:
                raise CorpusFormatError(f"duplicate record id {rec.id!r}")
            self.by_id[rec.id] = rec

    def split(self, name: str) -> list[CorpusRecord]:
        return [r for r in self.records if r.split == name]

    @property
    def train(self) -> list[CorpusRecord]:
        return self.split("train")

    def __len__(self) -> int:
        return len(self.records)


def load_corpus(path: str | Path, split: str = "train",
                validate_smiles: bool = True) -> Corpus:
    """Load one corpus file, assigning every record to ``split``."""
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    path = Path(path)
    records: list[CorpusRecord] = []
    quarantined: list[QuarantinedRow] = []
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header.split("\t") != ["id", "smiles", "caption"]:
            raise CorpusFormatError(
                f"{path}: expected header 'id<TAB>smiles<TAB>caption', got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 2)
            if len(parts) != 3 or not parts[0]:
                quarantined.append(QuarantinedRow(line_no, None, "malformed row"))
                log.warning("%s:%d: malformed row quarantined", path, line_no)
                continue
            rec_id, smiles, caption = parts
            if validate_smiles and not is_valid(smiles):
                quarantined.append(QuarantinedRow(line_no, rec_id, "invalid SMILES"))
                log.warning("%s:%d: record %s has invalid SMILES, quarantined",
                            path, line_no, rec_id)
                continue
            records.append(CorpusRecord(rec_id, smiles, caption, split))
    return Corpus(records=records, quarantined=quarantined)


def save_corpus(records: list[CorpusRecord], path: str | Path) -> None:
    """Write records in the corpus TSV format (captions must be tab-free)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        fh.write("id\tsmiles\tcaption\n")
        for rec in records:
            fh.write(f"{rec.id}\t{rec.smiles}\t{rec.caption}\n")
