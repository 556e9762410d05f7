"""SMILES parser for the supported subset.

Supported: organic-subset atoms, bracket atoms (isotope, charge, explicit H),
branches, ring closures (including %nn), dot-separated components, lowercase
aromatic atoms, and the bond symbols ``- = # :``. Stereo markers (@, @@, /, \\)
are parsed and discarded because none of the downstream similarity metrics
are stereo-aware. Anything else is rejected with an explicit error.

Implicit hydrogens are assigned from the bond orders as written (Kekule
valences), then aromaticity of explicit alternating rings is perceived with
a simplified Hueckel rule; hydrogen counts are never rewritten by perception.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .elements import (
    AROMATIC_BARE,
    AROMATIC_BRACKET,
    ATOMIC_NUMBER,
    ORGANIC_SUBSET,
    PI_LONE_PAIR_DONORS,
    VALENCES,
    max_allowed_valence,
)
from .errors import (
    RingMismatchError,
    SmilesSyntaxError,
    UnsupportedFeatureError,
    ValenceError,
)
from .model import Atom, Bond, BondOrder, Molecule
from .rings import connected_components, ring_bond_flags, simple_cycles_upto, sssr

_BOND_CHARS = {"-": BondOrder.SINGLE, "=": BondOrder.DOUBLE,
               "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC}

_BRACKET_RE = re.compile(
    r"""^(?P<isotope>\d{1,3})?
        (?P<symbol>[A-Z][a-z]?|as|se|[bcnops])
        (?P<chiral>@{1,2})?
        (?P<hcount>H\d?)?
        (?P<charge>\+{1,8}|-{1,8}|[+-]\d)?
        $""",
    re.VERBOSE,
)

# Aromatic bare atoms whose Kekule form carries a ring double bond get one
# extra unit of bond order (c, n, p); lone-pair donors (o, s) and b do not.
_AROMATIC_PI_PLUS_ONE = frozenset({"C", "N", "P"})

# maximum ring size considered by aromaticity perception
_AROMATIC_RING_MAX = 8


@dataclass
class _DraftAtom:
    element: str
    index: int
    charge: int = 0
    isotope: int | None = None
    explicit_h: int = 0
    implicit_h: int = 0
    aromatic: bool = False
    bracketed: bool = False


@dataclass
class _DraftBond:
    a: int
    b: int
    order: BondOrder | None  # None = default (single or aromatic)

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a Molecule.

    Raises SmilesSyntaxError, RingMismatchError, ValenceError or
    UnsupportedFeatureError when the string is outside the supported,
    chemically consistent subset.
    """
    if text is None or not text.strip():
        raise SmilesSyntaxError("empty SMILES string")
    text = text.strip()

    atoms: list[_DraftAtom] = []
    bonds: list[_DraftBond] = []
    ring_open: dict[int, tuple[int, BondOrder | None]] = {}
    for fragment in text.split("."):
        if not fragment:
            raise SmilesSyntaxError("empty dot-separated component")
        _scan_fragment(fragment, atoms, bonds, ring_open)
    if ring_open:
        digits = ", ".join(str(d) for d in sorted(ring_open))
        raise RingMismatchError(f"unclosed ring closure digit(s): {digits}")

    _check_duplicate_bonds(bonds)
    _resolve_default_bonds(atoms, bonds)
    _assign_hydrogens(atoms, bonds)
    _perceive_aromaticity(atoms, bonds)
    _check_aromatic_consistency(atoms, bonds)

    edges = [(b.a, b.b) for b in bonds]
    final_atoms = [
        Atom(element=d.element, index=d.index, charge=d.charge, isotope=d.isotope,
             explicit_h=d.explicit_h, implicit_h=d.implicit_h, aromatic=d.aromatic,
             bracketed=d.bracketed)
        for d in atoms
    ]
    final_bonds = [Bond(b.a, b.b, b.order) for b in bonds]
    return Molecule(atoms=final_atoms, bonds=final_bonds,
                    rings=sssr(len(atoms), edges),
                    components=connected_components(len(atoms), edges))


def is_valid(text) -> bool:
    """True iff parse_smiles succeeds. Never raises."""
    try:
        parse_smiles(text)
        return True
    except Exception:
        return False


def _scan_fragment(fragment: str, atoms: list[_DraftAtom], bonds: list[_DraftBond],
                   ring_open: dict[int, tuple[int, BondOrder | None]]) -> None:
    prev: int | None = None
    pending: BondOrder | None = None
    pending_set = False
    branch_stack: list[tuple[int | None, int]] = []

    def add_atom(draft: _DraftAtom) -> None:
        nonlocal prev, pending, pending_set
        atoms.append(draft)
        if prev is not None:
            bonds.append(_DraftBond(prev, draft.index, pending))
        elif pending_set:
            raise SmilesSyntaxError("bond symbol before the first atom of a component")
        prev = draft.index
        pending = None
        pending_set = False

    i = 0
    n = len(fragment)
    while i < n:
        ch = fragment[i]

        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch opened before any atom")
            if pending_set:
                raise SmilesSyntaxError("bond symbol immediately before '('")
            branch_stack.append((prev, len(atoms)))
            i += 1
            continue

        if ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unmatched ')'")
            if pending_set:
                raise SmilesSyntaxError("dangling bond symbol before ')'")
            opened_at_prev, atom_count = branch_stack.pop()
            if len(atoms) == atom_count:
                raise SmilesSyntaxError("empty branch '()'")
            prev = opened_at_prev
            i += 1
            continue

        if ch in _BOND_CHARS:
            if pending_set:
                raise SmilesSyntaxError("two consecutive bond symbols")
            pending = _BOND_CHARS[ch]
            pending_set = True
            i += 1
            continue

        if ch in "/\\":
            # cis/trans marker: kept as a plain single bond
            if pending_set:
                raise SmilesSyntaxError("bond symbol before stereo bond marker")
            pending = BondOrder.SINGLE
            pending_set = True
            i += 1
            continue

        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesSyntaxError("ring closure before any atom")
            if ch == "%":
                if i + 3 > n or not fragment[i + 1 : i + 3].isdigit():
                    raise SmilesSyntaxError("'%' ring closure needs two digits")
                num = int(fragment[i + 1 : i + 3])
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in ring_open:
                other, order_at_open = ring_open.pop(num)
                if other == prev:
                    raise RingMismatchError(f"ring closure {num} bonds an atom to itself")
                order = _merge_ring_orders(order_at_open, pending if pending_set else None, num)
                bonds.append(_DraftBond(other, prev, order))
            else:
                ring_open[num] = (prev, pending if pending_set else None)
            pending = None
            pending_set = False
            continue

        if ch == "[":
            end = fragment.find("]", i)
            if end == -1:
                raise SmilesSyntaxError("unterminated bracket atom")
            add_atom(_parse_bracket(fragment[i + 1 : end], len(atoms)))
            i = end + 1
            continue

        if ch == "*":
            raise UnsupportedFeatureError("wildcard atom '*' is not supported")

        if ch.isupper():
            symbol = ch
            if i + 1 < n and ch + fragment[i + 1] in ("Cl", "Br"):
                symbol = ch + fragment[i + 1]
                i += 1
            if symbol not in ORGANIC_SUBSET:
                raise SmilesSyntaxError(
                    f"atom '{symbol}' must be written in brackets"
                    if symbol in ATOMIC_NUMBER
                    else f"unrecognized atom symbol '{symbol}'")
            add_atom(_DraftAtom(symbol, len(atoms)))
            i += 1
            continue

        if ch.islower():
            if ch not in AROMATIC_BARE:
                raise SmilesSyntaxError(f"unrecognized aromatic symbol '{ch}'")
            add_atom(_DraftAtom(ch.upper(), len(atoms), aromatic=True))
            i += 1
            continue

        raise SmilesSyntaxError(f"unexpected character {ch!r} at position {i}")

    if branch_stack:
        raise SmilesSyntaxError("unclosed '(' branch")
    if pending_set:
        raise SmilesSyntaxError("dangling bond symbol at end of component")


def _merge_ring_orders(at_open: BondOrder | None, at_close: BondOrder | None,
                       num: int) -> BondOrder | None:
    if at_open is not None and at_close is not None and at_open != at_close:
        raise SmilesSyntaxError(f"conflicting bond symbols on ring closure {num}")
    return at_open if at_open is not None else at_close


def _parse_bracket(body: str, index: int) -> _DraftAtom:
    if not body:
        raise SmilesSyntaxError("empty bracket atom '[]'")
    for tag in ("@TH", "@AL", "@SP", "@TB", "@OH"):
        if tag in body:
            raise UnsupportedFeatureError("extended chirality classes are not supported")
    if ":" in body:
        raise UnsupportedFeatureError("atom class maps are not supported")
    if "*" in body:
        raise UnsupportedFeatureError("wildcard atom '*' is not supported")
    m = _BRACKET_RE.match(body)
    if m is None:
        raise SmilesSyntaxError(f"malformed bracket atom '[{body}]'")

    raw_symbol = m.group("symbol")
    aromatic = raw_symbol[0].islower()
    if aromatic and raw_symbol not in AROMATIC_BRACKET:
        raise SmilesSyntaxError(f"'{raw_symbol}' cannot be aromatic")
    element = raw_symbol.capitalize() if aromatic else raw_symbol
    if element not in ATOMIC_NUMBER:
        raise SmilesSyntaxError(f"unknown element '{raw_symbol}'")

    isotope = int(m.group("isotope")) if m.group("isotope") else None
    hpart = m.group("hcount")
    explicit_h = 0
    if hpart:
        explicit_h = int(hpart[1:]) if len(hpart) > 1 else 1

    charge = 0
    cpart = m.group("charge")
    if cpart:
        if cpart[-1].isdigit():
            charge = int(cpart[1]) * (1 if cpart[0] == "+" else -1)
        else:
            charge = len(cpart) * (1 if cpart[0] == "+" else -1)
    if not -8 <= charge <= 8:
        raise UnsupportedFeatureError(f"charge {charge:+d} outside supported range")

    return _DraftAtom(element, index, charge=charge, isotope=isotope,
                      explicit_h=explicit_h, aromatic=aromatic, bracketed=True)


def _check_duplicate_bonds(bonds: list[_DraftBond]) -> None:
    seen: set[tuple[int, int]] = set()
    for b in bonds:
        key = (b.a, b.b) if b.a < b.b else (b.b, b.a)
        if key in seen:
            raise RingMismatchError(f"duplicate bond between atoms {key[0]} and {key[1]}")
        seen.add(key)


def _resolve_default_bonds(atoms: list[_DraftAtom], bonds: list[_DraftBond]) -> None:
    """Default bonds become aromatic between two aromatic atoms, else single."""
    for b in bonds:
        if b.order is None:
            if atoms[b.a].aromatic and atoms[b.b].aromatic:
                b.order = BondOrder.AROMATIC
            else:
                b.order = BondOrder.SINGLE


def order_total(element: str, aromatic: bool, orders: list[BondOrder]) -> int:
    """Bond-order total used by the valence model.

    Aromatic bonds count one sigma unit each; aromatic c/n/p atoms without
    an explicit multiple bond carry one extra unit for their ring pi bond
    (so fused systems work without kekulization), while aromatic o/s donate
    a lone pair instead and get no extra unit.
    """
    total = 0
    has_multiple = False
    for order in orders:
        if order is BondOrder.AROMATIC:
            total += 1
        else:
            total += int(order)
            if order is not BondOrder.SINGLE:
                has_multiple = True
    if aromatic and element in _AROMATIC_PI_PLUS_ONE and not has_multiple:
        total += 1
    return total


def implicit_h_for(element: str, aromatic: bool, orders: list[BondOrder]) -> int | None:
    """Implicit hydrogen count for a bare organic-subset atom.

    Returns None when no allowed valence can absorb the bond-order total.
    """
    vals = VALENCES.get(element)
    if vals is None:
        return None
    total = order_total(element, aromatic, orders)
    for v in vals:
        if v >= total:
            return v - total
    return None


def _assign_hydrogens(atoms: list[_DraftAtom], bonds: list[_DraftBond]) -> None:
    incident: list[list[BondOrder]] = [[] for _ in atoms]
    for b in bonds:
        incident[b.a].append(b.order)
        incident[b.b].append(b.order)

    for draft in atoms:
        orders = incident[draft.index]
        if draft.bracketed:
            limit = max_allowed_valence(draft.element, draft.charge)
            if limit is not None:
                total = order_total(draft.element, draft.aromatic, orders) + draft.explicit_h
                if total > limit:
                    raise ValenceError(
                        f"atom {draft.index} ({draft.element}{draft.charge:+d}) has "
                        f"valence {total}, allowed at most {limit}")
            draft.implicit_h = 0
        else:
            implicit = implicit_h_for(draft.element, draft.aromatic, orders)
            if implicit is None:
                total = order_total(draft.element, draft.aromatic, orders)
                raise ValenceError(
                    f"atom {draft.index} ({draft.element}) has bond order sum {total}, "
                    f"exceeding allowed valences {VALENCES[draft.element]}")
            draft.implicit_h = implicit


def _perceive_aromaticity(atoms: list[_DraftAtom], bonds: list[_DraftBond]) -> None:
    """Mark explicit alternating rings aromatic via a simplified Hueckel rule.

    A candidate ring (any simple cycle up to size 8) is aromatic when every
    member is sp2-capable and the summed pi contributions hit 4n+2:
    1 for an atom double-bonded to another ring-system atom, 2 for a
    lone-pair donor heteroatom or carbanion with only single bonds, 0 for a
    carbocation or neutral boron; exocyclic double bonds to non-ring atoms
    contribute 0 and triple bonds disqualify the ring.
    """
    edges = [(b.a, b.b) for b in bonds]
    ring_flags = ring_bond_flags(len(atoms), edges)
    in_ring = [False] * len(atoms)
    for bond, flag in zip(bonds, ring_flags):
        if flag:
            in_ring[bond.a] = True
            in_ring[bond.b] = True

    incident: list[list[_DraftBond]] = [[] for _ in atoms]
    for b in bonds:
        incident[b.a].append(b)
        incident[b.b].append(b)

    def pi_contribution(idx: int) -> int | None:
        atom = atoms[idx]
        if len(incident[idx]) > 3:
            return None
        if any(b.order is BondOrder.TRIPLE for b in incident[idx]):
            return None
        doubles = [b for b in incident[idx] if b.order is BondOrder.DOUBLE]
        if len(doubles) > 1:
            return None
        if doubles:
            return 1 if in_ring[doubles[0].other(idx)] else 0
        if atom.element == "C":
            if atom.charge < 0:
                return 2
            if atom.charge > 0:
                return 0
            return None  # saturated neutral carbon: not sp2-capable
        if atom.element == "B" and atom.charge == 0:
            return 0
        if atom.element in PI_LONE_PAIR_DONORS:
            return 2
        return None

    for cycle in simple_cycles_upto(len(atoms), edges, _AROMATIC_RING_MAX):
        total = 0
        ok = True
        for idx in cycle:
            contrib = pi_contribution(idx)
            if contrib is None:
                ok = False
                break
            total += contrib
        if not ok or total % 4 != 2:
            continue
        position = {idx: k for k, idx in enumerate(cycle)}
        for idx in cycle:
            atoms[idx].aromatic = True
        for b in bonds:
            if b.a in position and b.b in position:
                gap = abs(position[b.a] - position[b.b])
                if gap == 1 or gap == len(cycle) - 1:
                    b.order = BondOrder.AROMATIC


def _check_aromatic_consistency(atoms: list[_DraftAtom], bonds: list[_DraftBond]) -> None:
    edges = [(b.a, b.b) for b in bonds]
    ring_flags = ring_bond_flags(len(atoms), edges)
    atom_in_ring = [False] * len(atoms)
    for bond, flag in zip(bonds, ring_flags):
        if flag:
            atom_in_ring[bond.a] = True
            atom_in_ring[bond.b] = True
    for atom in atoms:
        if atom.aromatic and not atom_in_ring[atom.index]:
            raise ValenceError(
                f"aromatic atom '{atom.element}' at position {atom.index} is not in a ring")
    for bond, flag in zip(bonds, ring_flags):
        if bond.order is BondOrder.AROMATIC:
            if not (atoms[bond.a].aromatic and atoms[bond.b].aromatic):
                raise ValenceError("aromatic bond between non-aromatic atoms")
            if not flag:
                raise ValenceError("aromatic bond outside of a ring")
