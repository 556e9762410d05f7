"""Molecular graph model: atoms, bonds, molecules."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self) -> float:
        """Contribution to an atom's bond-order sum (aromatic counts 1.5)."""
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)


@dataclass(frozen=True)
class Atom:
    """One heavy atom of the graph.

    ``explicit_h`` is the hydrogen count written in a bracket atom;
    ``implicit_h`` is filled in by the valence model for bare organic-subset
    atoms (always 0 for bracket atoms, per SMILES semantics).
    """

    element: str
    index: int
    charge: int = 0
    isotope: int | None = None
    explicit_h: int = 0
    implicit_h: int = 0
    aromatic: bool = False
    bracketed: bool = False

    @property
    def total_h(self) -> int:
        return self.explicit_h + self.implicit_h


@dataclass(frozen=True)
class Bond:
    """Undirected bond between atom indices ``a`` and ``b`` (a != b)."""

    a: int
    b: int
    order: BondOrder

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass
class Molecule:
    """Parsed molecular graph.

    ``rings`` holds the smallest set of smallest rings as atom-index cycles;
    ``components`` the connected components (dot-separated SMILES parts stay
    tracked but disconnected).
    """

    atoms: list[Atom]
    bonds: list[Bond]
    rings: list[list[int]] = field(default_factory=list)
    components: list[list[int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._adjacency: list[list[tuple[int, Bond]]] = [[] for _ in self.atoms]
        for bond in self.bonds:
            self._adjacency[bond.a].append((bond.b, bond))
            self._adjacency[bond.b].append((bond.a, bond))

    def neighbors(self, idx: int) -> list[tuple[int, Bond]]:
        """(neighbor index, bond) pairs for one atom."""
        return self._adjacency[idx]

    def degree(self, idx: int) -> int:
        return len(self._adjacency[idx])

    def bond_between(self, a: int, b: int) -> Bond | None:
        for nbr, bond in self._adjacency[a]:
            if nbr == b:
                return bond
        return None

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    @property
    def num_bonds(self) -> int:
        return len(self.bonds)
