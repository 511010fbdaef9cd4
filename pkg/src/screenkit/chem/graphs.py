"""Graph isomorphism and substructure checks (VF2 via networkx)."""

from __future__ import annotations

import networkx as nx
from networkx.algorithms import isomorphism

from .molecule import Molecule


def to_networkx(mol: Molecule, with_hydrogens: bool = True) -> nx.Graph:
    g = nx.Graph()
    for k, a in enumerate(mol.atoms):
        label = (a.element, a.charge, a.aromatic, a.hcount) if with_hydrogens else (a.element,)
        g.add_node(k, label=label)
    for b in mol.bonds:
        g.add_edge(b.i, b.j, order=b.order)
    return g


def is_isomorphic(a: Molecule, b: Molecule) -> bool:
    if len(a.atoms) != len(b.atoms) or len(a.bonds) != len(b.bonds):
        return False
    return nx.is_isomorphic(
        to_networkx(a),
        to_networkx(b),
        node_match=isomorphism.categorical_node_match("label", None),
        edge_match=isomorphism.categorical_edge_match("order", None),
    )


def has_substructure(mol: Molecule, pattern: Molecule) -> bool:
    """Exact substructure match on elements and bond orders.

    Hydrogen counts are ignored since substitution changes them.
    """
    gm = isomorphism.GraphMatcher(
        to_networkx(mol, with_hydrogens=False),
        to_networkx(pattern, with_hydrogens=False),
        node_match=isomorphism.categorical_node_match("label", None),
        edge_match=isomorphism.categorical_edge_match("order", None),
    )
    return gm.subgraph_is_monomorphic()
