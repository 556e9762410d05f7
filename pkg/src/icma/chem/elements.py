"""Element tables backing the SMILES subset and the valence model."""

from __future__ import annotations

# All IUPAC element symbols, indexed by atomic number - 1.
PERIODIC_TABLE: tuple[str, ...] = (
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
    "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm",
    "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds",
    "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)

ATOMIC_NUMBER: dict[str, int] = {sym: i + 1 for i, sym in enumerate(PERIODIC_TABLE)}

# Elements writable without brackets (the SMILES organic subset).
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})

# Lowercase aromatic atoms accepted bare; bracketed forms also allow se/as.
AROMATIC_BARE = frozenset({"b", "c", "n", "o", "p", "s"})
AROMATIC_BRACKET = frozenset({"b", "c", "n", "o", "p", "s", "se", "as"})

# Allowed total valences per element (ascending). Drives implicit-hydrogen
# assignment for bare organic-subset atoms and the validity screen.
VALENCES: dict[str, tuple[int, ...]] = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

# Elements whose lone pair can feed an aromatic pi system when every
# incident bond is single (pyrrole N, furan O, thiophene S, ...).
PI_LONE_PAIR_DONORS = frozenset({"N", "O", "S", "P", "Se", "As"})


def max_allowed_valence(element: str, charge: int) -> int | None:
    """Upper valence bound for the validity screen, or None when unchecked.

    Charged atoms get |charge| extra slack (the permissive direction);
    elements without a table entry (metals etc.) are not screened.
    """
    vals = VALENCES.get(element)
    if vals is None:
        return None
    return vals[-1] + abs(charge)
