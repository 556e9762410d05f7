"""Shared fixtures: molecule corpora and random re-writings of molecules."""

from __future__ import annotations

import random

import pytest

from icma.chem import parse_smiles
from icma.chem.canon import _emit
from icma.chem.model import Bond, Molecule

# 50 parser-subset molecules spanning chains, branches, rings, fused and
# heteroaromatic systems, charges, isotopes and multi-component salts.
MOLECULES_50 = [
    "C", "CC", "CCO", "CCN", "CCOC", "CC(C)O", "CC(C)(C)O", "C=C", "C#N",
    "CC=O", "CC(=O)O", "CC(=O)OC", "NCC(=O)O", "C1CC1", "C1CCC1", "C1CCCC1",
    "C1CCCCC1", "C1CCOC1", "C1CCNC1", "C1CCOCC1", "c1ccccc1", "Cc1ccccc1",
    "c1ccncc1", "c1ccoc1", "c1ccsc1", "c1cc[nH]c1", "Oc1ccccc1",
    "Nc1ccccc1", "Clc1ccccc1", "O=C(O)c1ccccc1", "COc1ccccc1",
    "c1ccc2ccccc2c1", "c1ccc2[nH]ccc2c1", "c1cnc2[nH]ccc2c1",
    "CC(=O)Oc1ccccc1C(=O)O", "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",
    "C1CCC2CCCCC2C1", "C1CC2CCC1C2", "OCC1OC(O)C(O)C(O)C1O",
    "N#Cc1ccccc1", "CC(C)Cc1ccc(C)cc1", "OS(=O)(=O)O", "ClC(Cl)(Cl)Cl",
    "FC(F)(F)c1ccccc1", "[13C]C", "[O-]C(=O)C", "C[N+](C)(C)C",
    "[Na+].[Cl-]", "[O-]C(=O)c1ccccc1.[Na+]", "CCS(=O)(=O)N",
]

assert len(MOLECULES_50) == 50


def random_rewrite(mol: Molecule, rng: random.Random) -> str:
    """A valid, non-canonical SMILES of the same molecule: each component
    is emitted under a random atom ranking, then components are shuffled."""
    pieces = []
    for comp in mol.components:
        local_of = {g: i for i, g in enumerate(comp)}
        atoms = [mol.atoms[g] for g in comp]
        bonds, seen = [], set()
        for g in comp:
            for _, bond in mol.neighbors(g):
                if bond.key not in seen:
                    seen.add(bond.key)
                    bonds.append(Bond(local_of[bond.a], local_of[bond.b], bond.order))
        adj = [[] for _ in atoms]
        for b in bonds:
            adj[b.a].append((b.b, b))
            adj[b.b].append((b.a, b))
        ranks = list(range(len(atoms)))
        rng.shuffle(ranks)
        pieces.append(_emit(atoms, adj, ranks))
    rng.shuffle(pieces)
    return ".".join(pieces)


@pytest.fixture(scope="session")
def molecules_50() -> list[str]:
    return list(MOLECULES_50)


@pytest.fixture()
def rng() -> random.Random:
    return random.Random(0xC0FFEE)


def make_corpus_rows(smiles_captions: list[tuple[str, str]]) -> str:
    lines = ["id\tsmiles\tcaption"]
    for k, (smi, cap) in enumerate(smiles_captions):
        lines.append(f"r{k:03d}\t{smi}\t{cap}")
    return "\n".join(lines) + "\n"


@pytest.fixture()
def toy_corpus_file(tmp_path):
    rows = [
        ("CCO", "ethanol is a primary alcohol with a two carbon chain"),
        ("CCN", "ethylamine is a primary amine with a two carbon chain"),
        ("c1ccccc1", "benzene is an aromatic six membered hydrocarbon ring"),
        ("CC(=O)O", "acetic acid is a simple carboxylic acid"),
        ("CCOC", "ethyl methyl ether is a small ether"),
    ]
    path = tmp_path / "corpus.tsv"
    path.write_text(make_corpus_rows(rows), encoding="utf-8")
    return path
