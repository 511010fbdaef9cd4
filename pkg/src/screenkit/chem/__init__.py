from .graphs import has_substructure, is_isomorphic
from .io import load_corpus, read_smiles_file, read_smiles_records
from .molecule import AROMATIC, ELEMENTS, Atom, Bond, ChemError, Molecule, ValenceError
from .smiles import (
    SmilesError,
    UnbalancedBracket,
    UnclosedRing,
    UnknownElement,
    UnsupportedFeature,
    ValenceViolation,
    canonical_ranks,
    parse_smiles,
    random_smiles,
    write_smiles,
)
from .tensors import MAX_ATOMS, GraphTensors, TooManyAtoms, from_tensors, to_tensors

__all__ = [
    "AROMATIC", "ELEMENTS", "MAX_ATOMS", "Atom", "Bond", "ChemError", "GraphTensors", "Molecule",
    "SmilesError", "TooManyAtoms", "UnbalancedBracket", "UnclosedRing", "UnknownElement",
    "UnsupportedFeature", "ValenceError", "ValenceViolation", "canonical_ranks", "from_tensors",
    "has_substructure", "is_isomorphic", "load_corpus", "parse_smiles", "random_smiles",
    "read_smiles_file", "read_smiles_records", "to_tensors", "write_smiles",
]
