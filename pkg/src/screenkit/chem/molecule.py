"""Molecule graph type with valence bookkeeping."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import cached_property

ELEMENTS = ("C", "N", "O", "F", "S", "P", "Cl", "Br", "I", "H")
ELEMENT_INDEX = {e: i for i, e in enumerate(ELEMENTS)}

AROMATIC = 1.5
BOND_ORDERS = (1.0, 2.0, 3.0, AROMATIC)

# Allowed valences for a neutral atom, smallest first.
VALENCES = {
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "F": (1,),
    "S": (2, 4, 6),
    "P": (3, 5),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "H": (1,),
}


class ChemError(ValueError):
    """Base class for chemistry errors."""


class ValenceError(ChemError):
    pass


def allowed_valences(element: str, charge: int = 0) -> tuple[int, ...]:
    """Valences permitted for ``element`` carrying ``charge``.

    Carbon loses one bonding slot per unit of charge either way; the
    other elements follow the isoelectronic shift (N+ behaves like C,
    O- like F, and so on).
    """
    base = VALENCES[element]
    if element == "C" or element == "H":
        shifted = (v - abs(charge) for v in base)
    else:
        shifted = (v + charge for v in base)
    return tuple(v for v in shifted if v >= 0)


def bond_valence(order: float) -> int:
    """Valence slots a bond consumes; aromatic bonds count as one."""
    return 1 if order == AROMATIC else int(order)


def default_hydrogens(element: str, bond_sum: int, aromatic: bool) -> int | None:
    """Implicit hydrogen count for an organic-subset atom.

    Returns None when no allowed valence accommodates ``bond_sum``.
    Aromatic atoms reserve one slot for the ring pi system, using only the
    lowest valence; lone-pair donors such as furan oxygen get zero.
    """
    vals = VALENCES[element]
    if aromatic:
        lowest = vals[0]
        if lowest >= bond_sum + 1:
            return lowest - bond_sum - 1
        for v in vals:
            if v >= bond_sum:
                return 0
        return None
    for v in vals:
        if v >= bond_sum:
            return v - bond_sum
    return None


@dataclass(frozen=True)
class Atom:
    element: str
    charge: int = 0
    hcount: int = 0
    aromatic: bool = False

    def __post_init__(self):
        if self.element not in ELEMENT_INDEX:
            raise ChemError(f"unknown element {self.element!r}")
        if self.hcount < 0:
            raise ChemError("negative hydrogen count")


@dataclass(frozen=True)
class Bond:
    i: int
    j: int
    order: float = 1.0


@dataclass(frozen=True)
class Molecule:
    """Atom/bond graph. Bonds are stored with ``i < j``, sorted."""

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.atoms)
        norm = []
        seen = set()
        for b in self.bonds:
            i, j = (b.i, b.j) if b.i < b.j else (b.j, b.i)
            if i == j:
                raise ChemError(f"bond endpoints must differ (atom {i})")
            if i < 0 or j >= n:
                raise ChemError(f"bond ({b.i}, {b.j}) out of range")
            if (i, j) in seen:
                raise ChemError(f"duplicate bond ({i}, {j})")
            if b.order not in BOND_ORDERS:
                raise ChemError(f"bad bond order {b.order}")
            if b.order == AROMATIC and not (self.atoms[i].aromatic and self.atoms[j].aromatic):
                raise ChemError(f"aromatic bond ({i}, {j}) between non-aromatic atoms")
            seen.add((i, j))
            norm.append(Bond(i, j, float(b.order)))
        norm.sort(key=lambda b: (b.i, b.j))
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(norm))
        for idx in range(n):
            if self.excess_valence(idx) > 0:
                a = self.atoms[idx]
                raise ValenceError(
                    f"atom {idx} ({a.element}, charge {a.charge}) exceeds its maximum valence"
                )

    @classmethod
    def from_graph(
        cls,
        elements: Sequence[str],
        bonds: Sequence[tuple[int, int, float]],
        name: str | None = None,
    ) -> Molecule:
        """Build a neutral, non-aromatic molecule with default implicit H."""
        sums = [0] * len(elements)
        for i, j, order in bonds:
            sums[i] += bond_valence(order)
            sums[j] += bond_valence(order)
        atoms = []
        for k, el in enumerate(elements):
            h = default_hydrogens(el, sums[k], False)
            if h is None:
                raise ValenceError(f"atom {k} ({el}) exceeds its maximum valence")
            atoms.append(Atom(el, 0, h, False))
        return cls(tuple(atoms), tuple(Bond(i, j, float(o)) for i, j, o in bonds), name)

    def __len__(self):
        return len(self.atoms)

    @cached_property
    def neighbors(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        """Per atom: ``(neighbor index, bond order)`` pairs."""
        adj: list[list[tuple[int, float]]] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.i].append((b.j, b.order))
            adj[b.j].append((b.i, b.order))
        return tuple(tuple(sorted(a)) for a in adj)

    def bond_sum(self, idx: int) -> int:
        return sum(bond_valence(o) for _, o in self.neighbors[idx])

    def excess_valence(self, idx: int) -> int:
        a = self.atoms[idx]
        allowed = allowed_valences(a.element, a.charge)
        used = self.bond_sum(idx) + a.hcount
        if not allowed:
            return used if used else 0
        return used - max(allowed)

    @property
    def heavy_atom_count(self) -> int:
        return sum(1 for a in self.atoms if a.element != "H")

    @cached_property
    def ring_bonds(self) -> frozenset[tuple[int, int]]:
        """Bonds that lie on at least one cycle (i.e. are not bridges)."""
        out = set()
        for b in self.bonds:
            # b is on a cycle iff its endpoints stay connected without it
            stack, seen = [b.i], {b.i}
            while stack:
                u = stack.pop()
                for w, _ in self.neighbors[u]:
                    if (min(u, w), max(u, w)) == (b.i, b.j) or w in seen:
                        continue
                    seen.add(w)
                    stack.append(w)
            if b.j in seen:
                out.add((b.i, b.j))
        return frozenset(out)

    @cached_property
    def ring_atoms(self) -> frozenset[int]:
        return frozenset(k for pair in self.ring_bonds for k in pair)

    @cached_property
    def components(self) -> tuple[tuple[int, ...], ...]:
        seen: set[int] = set()
        comps = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            seen.add(start)
            stack, comp = [start], []
            while stack:
                u = stack.pop()
                comp.append(u)
                for w, _ in self.neighbors[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(tuple(sorted(comp)))
        return tuple(comps)

    @property
    def ring_count(self) -> int:
        """Cyclomatic number: bonds - atoms + components."""
        return len(self.bonds) - len(self.atoms) + len(self.components)

    def permuted(self, perm: Sequence[int]) -> Molecule:
        """Relabel so that new atom ``k`` is old atom ``perm[k]``."""
        inv = {old: new for new, old in enumerate(perm)}
        atoms = tuple(self.atoms[old] for old in perm)
        bonds = tuple(Bond(inv[b.i], inv[b.j], b.order) for b in self.bonds)
        return Molecule(atoms, bonds, self.name)

    def with_name(self, name: str | None) -> Molecule:
        return Molecule(self.atoms, self.bonds, name)
