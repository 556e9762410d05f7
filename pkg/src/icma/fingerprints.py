"""Morgan (circular) and path fingerprints plus Dice/Tanimoto similarity.

Substructure identifiers are 64-bit FNV-1a hashes over a canonical
serialization of each environment, so fingerprints are deterministic,
portable and independent of input atom order. Identifiers fold onto a
fixed-width bit vector by ``id mod width``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .chem.model import BondOrder, Molecule
from .rng import fnv1a64


class FingerprintError(ValueError):
    """Invalid fingerprint arguments."""


class BothEmptyError(FingerprintError):
    """Similarity of two empty fingerprints is undefined."""


@dataclass(frozen=True)
class FingerprintVector:
    """Folded bit vector plus the multiset of hashes it was folded from."""

    kind: str  # "morgan" | "path"
    param: int  # radius (morgan) or max path length (path)
    width: int
    ids: tuple[int, ...]  # sorted multiset of 64-bit environment hashes

    @property
    def bits(self) -> frozenset[int]:
        return frozenset(i % self.width for i in self.ids)

    @property
    def n_bits_set(self) -> int:
        return len(self.bits)


def _hash_parts(*parts) -> int:
    """FNV-1a over a flat, unambiguous serialization of nested tuples."""
    out = bytearray()

    def feed(value) -> None:
        if isinstance(value, tuple):
            out.extend(b"(")
            for item in value:
                feed(item)
            out.extend(b")")
        else:
            out.extend(str(value).encode("utf-8"))
            out.extend(b";")

    feed(parts)
    return fnv1a64(bytes(out))


def _atom_invariant(mol: Molecule, idx: int) -> tuple:
    a = mol.atoms[idx]
    return (a.element, a.charge, a.isotope or 0, mol.degree(idx), a.total_h,
            int(a.aromatic))


def _bond_code(order: BondOrder) -> int:
    return int(order)


def _check_params(radius_or_len: int, width: int, kind: str) -> None:
    if width < 64 or width & (width - 1):
        raise FingerprintError(f"width must be a power of two >= 64, got {width}")
    if kind == "morgan" and radius_or_len < 0:
        raise FingerprintError("radius must be >= 0")
    if kind == "path" and not 1 <= radius_or_len <= 7:
        raise FingerprintError("max path length must be in [1, 7]")


def morgan_environment_key(mol: Molecule, dist: dict[int, int],
                           r: int) -> tuple[frozenset, frozenset]:
    """Substructure coverage of one atom-centered environment.

    The pair (atoms within r, bonds reached by a breadth-r exploration)
    identifies the substructure for duplicate removal; an environment that
    stops growing keeps the same key at every further radius.
    """
    atoms_in = frozenset(v for v, d in dist.items() if d <= r)
    if r == 0:
        return atoms_in, frozenset()
    far = 10 ** 9
    bonds_in = frozenset(
        b.key for b in mol.bonds
        if min(dist.get(b.a, far), dist.get(b.b, far)) <= r - 1
        and max(dist.get(b.a, far), dist.get(b.b, far)) <= r
    )
    return atoms_in, bonds_in


def morgan_fingerprint(mol: Molecule, radius: int = 2,
                       width: int = 2048) -> FingerprintVector:
    """ECFP-style circular fingerprint.

    Atom identifiers start from local invariants and are iteratively updated
    with the sorted (bond, neighbor-id) lists. Duplicate environments — two
    centers covering the same atom/bond sets — are removed: the earlier
    iteration wins, then the smaller identifier.
    """
    _check_params(radius, width, "morgan")
    n = mol.num_atoms
    dist = [_bfs_distances(mol, a) for a in range(n)]

    ids = [_hash_parts("atom", _atom_invariant(mol, a)) for a in range(n)]
    kept: set[tuple[frozenset, frozenset]] = set()
    collected: list[int] = []
    for r in range(radius + 1):
        if r > 0:
            new_ids = []
            for a in range(n):
                nbrs = sorted(
                    (_bond_code(bond.order), ids[nbr]) for nbr, bond in mol.neighbors(a)
                )
                new_ids.append(_hash_parts("iter", r, ids[a], tuple(nbrs)))
            ids = new_ids
        round_best: dict[tuple[frozenset, frozenset], int] = {}
        for a in range(n):
            key = morgan_environment_key(mol, dist[a], r)
            if key in kept:
                continue  # same substructure seen at an earlier iteration
            if key not in round_best or ids[a] < round_best[key]:
                round_best[key] = ids[a]
        for key, ident in round_best.items():
            kept.add(key)
            collected.append(ident)

    return FingerprintVector(kind="morgan", param=radius, width=width,
                             ids=tuple(sorted(collected)))


def _bfs_distances(mol: Molecule, start: int) -> dict[int, int]:
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for w, _ in mol.neighbors(v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def _path_atom_token(mol: Molecule, idx: int) -> tuple:
    a = mol.atoms[idx]
    return (a.element, a.charge, int(a.aromatic))


def path_id(mol: Molecule, atom_indices: list[int]) -> int:
    """Hash of one simple path, direction-normalized.

    The path serializes to alternating atom and bond tokens; the
    lexicographically smaller of the two reading directions is hashed.
    """
    tokens: list = [_path_atom_token(mol, atom_indices[0])]
    for prev, cur in zip(atom_indices, atom_indices[1:]):
        bond = mol.bond_between(prev, cur)
        assert bond is not None
        tokens.append(_bond_code(bond.order))
        tokens.append(_path_atom_token(mol, cur))
    forward = tuple(tokens)
    backward = tuple(reversed(tokens))
    return _hash_parts("path", min(forward, backward))


def path_fingerprint(mol: Molecule, max_len: int = 7,
                     width: int = 2048) -> FingerprintVector:
    """Linear-path fingerprint over all simple paths of 0..max_len bonds.

    Zero-bond paths (single atoms) are included so isolated atoms still
    produce bits.
    """
    _check_params(max_len, width, "path")
    collected: list[int] = []
    for a in range(mol.num_atoms):
        collected.append(path_id(mol, [a]))

    def extend(path: list[int], on_path: set[int]) -> None:
        head = path[-1]
        for w, _ in mol.neighbors(head):
            if w in on_path:
                continue
            path.append(w)
            if path[0] < w:  # count each undirected path once
                collected.append(path_id(mol, path))
            if len(path) <= max_len:
                on_path.add(w)
                extend(path, on_path)
                on_path.discard(w)
            path.pop()

    for a in range(mol.num_atoms):
        extend([a], {a})
    return FingerprintVector(kind="path", param=max_len, width=width,
                             ids=tuple(sorted(collected)))


def _check_compatible(a: FingerprintVector, b: FingerprintVector) -> tuple[frozenset, frozenset]:
    if a.kind != b.kind:
        raise FingerprintError(f"kind mismatch: {a.kind} vs {b.kind}")
    if a.width != b.width:
        raise FingerprintError(f"width mismatch: {a.width} vs {b.width}")
    sa, sb = a.bits, b.bits
    if not sa and not sb:
        raise BothEmptyError("similarity of two empty fingerprints is undefined")
    return sa, sb


def dice(a: FingerprintVector, b: FingerprintVector) -> float:
    """Dice coefficient 2|A&B| / (|A|+|B|) over set bits."""
    sa, sb = _check_compatible(a, b)
    return 2.0 * len(sa & sb) / (len(sa) + len(sb))


def tanimoto(a: FingerprintVector, b: FingerprintVector) -> float:
    """Tanimoto coefficient |A&B| / |A|B| over set bits."""
    sa, sb = _check_compatible(a, b)
    inter = len(sa & sb)
    return inter / (len(sa) + len(sb) - inter)
