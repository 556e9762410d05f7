"""Synthetic retrieval-informative corpus generator.

Records come in families: every member of a family shares one distinctive
caption token and one randomly drawn molecule, so a caption query retrieves
same-family neighbours whose context block literally contains the answer.
The molecules are random heteroatom chains (valid SMILES by construction)
and are unguessable from the caption text alone, which makes copying from
context the only reliable strategy.

Output uses the context engine's corpus format: TSV with an
``id<TAB>smiles<TAB>caption`` header.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

CHAIN_ALPHABET = "CNOS"  # all divalent-or-better: linear chains always parse


@dataclass(frozen=True)
class CorpusSpec:
    families: int = 40
    train_members: int = 3
    test_members: int = 1
    chain_min: int = 4
    chain_max: int = 6
    seed: int = 0


def random_chain(rng: random.Random, spec: CorpusSpec) -> str:
    length = rng.randint(spec.chain_min, spec.chain_max)
    return "".join(rng.choice(CHAIN_ALPHABET) for _ in range(length))


def caption_for(family: int, member: int) -> str:
    return f"item {member} of family fam{family:03d}x"


def generate_corpus(out_dir: str | Path, spec: CorpusSpec = CorpusSpec()) -> tuple[Path, Path]:
    """Write train.tsv and test.tsv; returns their paths.

    Test records belong to train families (with unseen member indices), so
    retrieval from the train split surfaces examples carrying the exact
    target molecule.
    """
    rng = random.Random(spec.seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    targets = {}
    seen = set()
    for family in range(spec.families):
        while True:
            smiles = random_chain(rng, spec)
            if smiles not in seen:
                seen.add(smiles)
                targets[family] = smiles
                break

    train_path = out_dir / "train.tsv"
    with train_path.open("w", encoding="utf-8") as fh:
        fh.write("id\tsmiles\tcaption\n")
        for family in range(spec.families):
            for member in range(spec.train_members):
                fh.write(f"f{family:03d}m{member}\t{targets[family]}\t"
                         f"{caption_for(family, member)}\n")

    test_families = rng.sample(range(spec.families),
                               min(spec.families, spec.families // 2))
    test_path = out_dir / "test.tsv"
    with test_path.open("w", encoding="utf-8") as fh:
        fh.write("id\tsmiles\tcaption\n")
        for family in sorted(test_families):
            for member in range(spec.test_members):
                member_id = spec.train_members + member  # unseen member index
                fh.write(f"t{family:03d}m{member_id}\t{targets[family]}\t"
                         f"{caption_for(family, member_id)}\n")
    return train_path, test_path
