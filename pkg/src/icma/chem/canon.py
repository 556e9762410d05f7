"""Canonical SMILES generation.

Atom ranking uses Morgan-style iterative refinement over local invariants
(element, isotope, charge, degree, hydrogen count, aromatic flag). Remaining
ties are resolved by branching: every member of the lowest tied class is
tentatively promoted, refinement reruns, and the lexicographically smallest
emitted string wins. That keeps the output independent of input atom order
even for symmetric molecules where refinement alone cannot separate atoms.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .elements import AROMATIC_BARE, ORGANIC_SUBSET
from .errors import ChemError
from .model import Atom, Bond, BondOrder, Molecule
from .parser import implicit_h_for, parse_smiles


@dataclass(frozen=True)
class CanonicalSmiles:
    """Canonical writing of a molecule; re-canonicalizing is a fixed point."""

    text: str


def canonicalize(mol: Molecule) -> CanonicalSmiles:
    """Canonical SMILES of a molecule: depends only on the graph, not on
    input atom order; multi-component molecules join sorted on '.'."""
    limit = sys.getrecursionlimit()
    needed = 2 * mol.num_atoms + 500
    if needed > limit:
        sys.setrecursionlimit(needed)
    try:
        pieces = [_canonical_component(mol, comp) for comp in mol.components]
    finally:
        if needed > limit:
            sys.setrecursionlimit(limit)
    return CanonicalSmiles(".".join(sorted(pieces)))


def canonical_smiles(text: str) -> str:
    """Parse and canonicalize in one step."""
    return canonicalize(parse_smiles(text)).text


# ---------------------------------------------------------------------------
# ranking
# ---------------------------------------------------------------------------

def _canonical_component(mol: Molecule, comp: list[int]) -> str:
    local_of = {g: i for i, g in enumerate(comp)}
    atoms = [mol.atoms[g] for g in comp]
    bonds: list[Bond] = []
    seen: set[tuple[int, int]] = set()
    for g in comp:
        for _, bond in mol.neighbors(g):
            if bond.key not in seen:
                seen.add(bond.key)
                bonds.append(Bond(local_of[bond.a], local_of[bond.b], bond.order))

    adj: list[list[tuple[int, Bond]]] = [[] for _ in atoms]
    for bond in bonds:
        adj[bond.a].append((bond.b, bond))
        adj[bond.b].append((bond.a, bond))

    initial = _dense_ranks([
        (a.element, a.isotope or 0, a.charge, len(adj[i]), a.total_h, a.aromatic)
        for i, a in enumerate(atoms)
    ])
    return _best_emission(atoms, adj, initial)


def _dense_ranks(keys: list) -> list[int]:
    order = {key: rank for rank, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def _refine(adj: list[list[tuple[int, Bond]]], ranks: list[int]) -> list[int]:
    n = len(ranks)
    while True:
        sigs = [
            (ranks[i], tuple(sorted((int(b.order), ranks[j]) for j, b in adj[i])))
            for i in range(n)
        ]
        new_ranks = _dense_ranks(sigs)
        if new_ranks == ranks:
            return ranks
        ranks = new_ranks


def _best_emission(atoms: list[Atom], adj: list[list[tuple[int, Bond]]],
                   ranks: list[int]) -> str:
    ranks = _refine(adj, ranks)
    tied_class = _lowest_tied_class(ranks)
    if tied_class is None:
        return _emit(atoms, adj, ranks)
    best: str | None = None
    for atom_idx in tied_class:
        promoted = _dense_ranks([
            (ranks[i], 0 if i == atom_idx else 1) for i in range(len(ranks))
        ])
        candidate = _best_emission(atoms, adj, promoted)
        if best is None or candidate < best:
            best = candidate
    assert best is not None
    return best


def _lowest_tied_class(ranks: list[int]) -> list[int] | None:
    members: dict[int, list[int]] = {}
    for i, r in enumerate(ranks):
        members.setdefault(r, []).append(i)
    for r in sorted(members):
        if len(members[r]) > 1:
            return members[r]
    return None


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def _emit(atoms: list[Atom], adj: list[list[tuple[int, Bond]]],
          ranks: list[int]) -> str:
    n = len(atoms)
    start = min(range(n), key=lambda i: ranks[i])

    visited = [False] * n
    visit_pos = [0] * n
    visit_order: list[int] = []
    children: list[list[tuple[int, Bond]]] = [[] for _ in range(n)]
    back_edges: list[tuple[int, int, Bond]] = []  # (later atom, earlier atom, bond)
    used_bonds: set[tuple[int, int]] = set()

    def walk(v: int) -> None:
        visit_pos[v] = len(visit_order)
        visit_order.append(v)
        for w, bond in sorted(adj[v], key=lambda t: ranks[t[0]]):
            if bond.key in used_bonds:
                continue
            used_bonds.add(bond.key)
            if visited[w]:
                back_edges.append((v, w, bond))
            else:
                visited[w] = True
                children[v].append((w, bond))
                walk(w)

    visited[start] = True
    walk(start)

    ring_tokens = _assign_ring_digits(atoms, visit_order, visit_pos, back_edges)

    out: list[str] = []

    def render(v: int) -> None:
        out.append(_atom_token(atoms[v], [b.order for _, b in adj[v]]))
        out.extend(ring_tokens.get(v, ()))
        kids = children[v]
        for i, (w, bond) in enumerate(kids):
            btok = _bond_token(bond, atoms)
            if i < len(kids) - 1:
                out.append("(" + btok)
                render(w)
                out.append(")")
            else:
                out.append(btok)
                render(w)

    render(start)
    return "".join(out)


def _assign_ring_digits(atoms: list[Atom], visit_order: list[int],
                        visit_pos: list[int],
                        back_edges: list[tuple[int, int, Bond]]) -> dict[int, list[str]]:
    """Ring-closure digit tokens per atom, smallest free digit first.

    The digit (with any needed bond symbol) is written at both endpoints;
    digits free up once closed and may be reused.
    """
    opens: dict[int, list[tuple[int, Bond]]] = {}
    for later, earlier, bond in back_edges:
        opens.setdefault(earlier, []).append((later, bond))

    tokens: dict[int, list[str]] = {}
    free = list(range(1, 100))
    pending_close: dict[tuple[int, int], tuple[int, str]] = {}
    for v in visit_order:
        # digits closing here (opened at an earlier atom)
        for key in [k for k in pending_close if k[1] == v]:
            digit, sym = pending_close.pop(key)
            tokens.setdefault(v, []).append(sym + _digit_token(digit))
            free.append(digit)
            free.sort()
        # digits opening here, partner furthest in visit order last
        for later, bond in sorted(opens.get(v, ()), key=lambda t: visit_pos[t[0]]):
            if not free:
                raise ChemError("too many simultaneous ring closures")
            digit = free.pop(0)
            sym = _bond_token(bond, atoms)
            tokens.setdefault(v, []).append(sym + _digit_token(digit))
            pending_close[(v, later)] = (digit, sym)
    return tokens


def _digit_token(digit: int) -> str:
    return str(digit) if digit < 10 else f"%{digit:02d}"


def _bond_token(bond: Bond, atoms: list[Atom]) -> str:
    if bond.order is BondOrder.DOUBLE:
        return "="
    if bond.order is BondOrder.TRIPLE:
        return "#"
    if bond.order is BondOrder.SINGLE:
        # explicit single between two aromatic atoms (e.g. biphenyl)
        if atoms[bond.a].aromatic and atoms[bond.b].aromatic:
            return "-"
    return ""


def _atom_token(atom: Atom, orders: list[BondOrder]) -> str:
    bare_ok = (
        atom.charge == 0
        and atom.isotope is None
        and atom.element in ORGANIC_SUBSET
        and (not atom.aromatic or atom.element.lower() in AROMATIC_BARE)
    )
    if bare_ok and implicit_h_for(atom.element, atom.aromatic, orders) == atom.total_h:
        return atom.element.lower() if atom.aromatic else atom.element

    sym = atom.element.lower() if atom.aromatic else atom.element
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(sym)
    h = atom.total_h
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    if atom.charge == 1:
        parts.append("+")
    elif atom.charge == -1:
        parts.append("-")
    elif atom.charge > 1:
        parts.append(f"+{atom.charge}")
    elif atom.charge < -1:
        parts.append(f"-{-atom.charge}")
    parts.append("]")
    return "".join(parts)
