"""Dense tensor view of a molecule: node features X and bond-order matrix A."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .molecule import AROMATIC, ELEMENTS, ELEMENT_INDEX, Atom, Bond, ChemError, Molecule, default_hydrogens

MAX_ATOMS = 38
ATOM_FEATURES = len(ELEMENTS) + 2  # one-hot element, charge, aromatic flag


class TooManyAtoms(ChemError):
    pass


@dataclass(frozen=True)
class GraphTensors:
    X: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        n = self.X.shape[0]
        if self.A.shape != (n, n):
            raise ValueError(f"A has shape {self.A.shape}, expected ({n}, {n})")
        self.X.setflags(write=False)
        self.A.setflags(write=False)

    @property
    def n_atoms(self) -> int:
        return self.X.shape[0]


def to_tensors(mol: Molecule, max_atoms: int = MAX_ATOMS) -> GraphTensors:
    n = len(mol.atoms)
    if n > max_atoms:
        raise TooManyAtoms(f"{n} atoms exceeds the limit of {max_atoms}")
    X = np.zeros((n, ATOM_FEATURES))
    for k, a in enumerate(mol.atoms):
        X[k, ELEMENT_INDEX[a.element]] = 1.0
        X[k, len(ELEMENTS)] = a.charge
        X[k, len(ELEMENTS) + 1] = float(a.aromatic)
    A = np.zeros((n, n))
    for b in mol.bonds:
        A[b.i, b.j] = A[b.j, b.i] = b.order
    return GraphTensors(X, A)


def from_tensors(t: GraphTensors, hydrogens: list[int] | None = None) -> Molecule:
    """Invert :func:`to_tensors`.

    Hydrogen counts are not stored in the tensors; they are recomputed with
    the default valence rules unless ``hydrogens`` is given.
    """
    n = t.n_atoms
    elements = [ELEMENTS[int(np.argmax(t.X[k, : len(ELEMENTS)]))] for k in range(n)]
    bonds = []
    sums = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            o = float(t.A[i, j])
            if o:
                bonds.append(Bond(i, j, o))
                v = 1 if o == AROMATIC else int(o)
                sums[i] += v
                sums[j] += v
    atoms = []
    for k in range(n):
        charge = int(round(t.X[k, len(ELEMENTS)]))
        aromatic = bool(t.X[k, len(ELEMENTS) + 1])
        if hydrogens is not None:
            h = hydrogens[k]
        else:
            h = default_hydrogens(elements[k], sums[k], aromatic) if charge == 0 else 0
            if h is None:
                h = 0
        atoms.append(Atom(elements[k], charge, h, aromatic))
    return Molecule(tuple(atoms), tuple(bonds))
