"""SMILES parsing, canonicalization and validity."""

from .canon import CanonicalSmiles, canonical_smiles, canonicalize
from .errors import (
    ChemError,
    RingMismatchError,
    SmilesSyntaxError,
    UnsupportedFeatureError,
    ValenceError,
)
from .model import Atom, Bond, BondOrder, Molecule
from .parser import is_valid, parse_smiles

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "CanonicalSmiles",
    "ChemError",
    "Molecule",
    "RingMismatchError",
    "SmilesSyntaxError",
    "UnsupportedFeatureError",
    "ValenceError",
    "canonical_smiles",
    "canonicalize",
    "is_valid",
    "parse_smiles",
]
