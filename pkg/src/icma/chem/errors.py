"""Exception types raised by SMILES parsing and validation."""


class ChemError(ValueError):
    """Base class for all molecule parsing/validation failures."""


class SmilesSyntaxError(ChemError):
    """The token stream is not grammatical in the supported SMILES subset."""


class RingMismatchError(ChemError):
    """Ring-closure digits left open, closed twice, or bonding an atom to itself."""


class ValenceError(ChemError):
    """An atom exceeds the valences allowed by the valence model."""


class UnsupportedFeatureError(ChemError):
    """Grammatical construct outside the supported subset (never silently accepted)."""
