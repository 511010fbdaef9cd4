"""SMILES reading and canonical writing.

Supported grammar: organic-subset atoms (aromatic lowercase included),
bracket atoms with H count and charge, bond symbols ``- = # :``, branches,
ring closures (``0-9`` and ``%nn``) and ``.`` separated components.
Stereochemistry, isotopes and atom classes are rejected.

Error positions are 1-based character offsets into the input.
"""

from __future__ import annotations

import random as _random
import re

from .molecule import (
    AROMATIC,
    ELEMENT_INDEX,
    Atom,
    Bond,
    ChemError,
    Molecule,
    ValenceError,
    default_hydrogens,
)


class SmilesError(ChemError):
    """Parse failure at a 1-based ``position`` of the input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnbalancedBracket(SmilesError):
    pass


class UnknownElement(SmilesError):
    pass


class UnclosedRing(SmilesError):
    pass


class ValenceViolation(SmilesError):
    pass


class UnsupportedFeature(SmilesError):
    pass


class SmilesSyntaxError(SmilesError):
    pass


ORGANIC = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"}
AROMATIC_ORGANIC = {"c", "n", "o", "p", "s"}
BOND_SYMBOLS = {"-": 1.0, "=": 2.0, "#": 3.0, ":": AROMATIC}

_BRACKET = re.compile(
    r"^(?P<iso>\d+)?(?P<sym>[A-Z][a-z]?|[a-z]{1,2})(?P<chiral>@+)?"
    r"(?P<h>H\d*)?(?P<charge>[+-]+\d*)?(?P<cls>:\d+)?$"
)


def _parse_bracket(body: str, pos: int) -> Atom:
    m = _BRACKET.match(body)
    if not m:
        if "@" in body:
            raise UnsupportedFeature("stereochemistry is not supported", pos)
        raise SmilesSyntaxError(f"malformed bracket atom [{body}]", pos)
    if m.group("iso"):
        raise UnsupportedFeature("isotopes are not supported", pos)
    if m.group("chiral"):
        raise UnsupportedFeature("stereochemistry is not supported", pos)
    if m.group("cls"):
        raise UnsupportedFeature("atom classes are not supported", pos)
    sym = m.group("sym")
    aromatic = sym[0].islower()
    element = sym.capitalize() if aromatic else sym
    if element not in ELEMENT_INDEX or (aromatic and sym not in AROMATIC_ORGANIC):
        raise UnknownElement(f"unknown element {sym!r}", pos)
    h = m.group("h")
    hcount = 0 if h is None else (int(h[1:]) if len(h) > 1 else 1)
    charge = 0
    c = m.group("charge")
    if c:
        sign = 1 if c[0] == "+" else -1
        digits = c.lstrip("+-")
        if digits:
            if len(c) - len(digits) != 1:
                raise SmilesSyntaxError(f"malformed charge {c!r}", pos)
            charge = sign * int(digits)
        else:
            if len(set(c)) != 1:
                raise SmilesSyntaxError(f"malformed charge {c!r}", pos)
            charge = sign * len(c)
    return Atom(element, charge, hcount, aromatic)


def parse_smiles(text: str, name: str | None = None) -> Molecule:
    """Parse a SMILES string into a valence-checked :class:`Molecule`."""
    s = text.strip()
    if not s:
        raise SmilesSyntaxError("empty SMILES", 1)

    atoms: list[Atom] = []
    bracketed: list[bool] = []
    atom_pos: list[int] = []
    bonds: dict[tuple[int, int], float] = {}
    explicit: set[tuple[int, int]] = set()

    prev: int | None = None
    pending: tuple[str, int] | None = None
    branches: list[tuple[int | None, int]] = []
    rings: dict[int, tuple[int, str | None, int]] = {}

    def add_bond(a: int, b: int, sym: str | None, pos: int):
        key = (min(a, b), max(a, b))
        if a == b:
            raise SmilesSyntaxError("ring closure onto the same atom", pos)
        if key in bonds:
            raise SmilesSyntaxError("duplicate bond", pos)
        if sym is None:
            order = AROMATIC if atoms[a].aromatic and atoms[b].aromatic else 1.0
        else:
            order = BOND_SYMBOLS[sym]
            if order == AROMATIC and not (atoms[a].aromatic and atoms[b].aromatic):
                raise SmilesSyntaxError("aromatic bond between non-aromatic atoms", pos)
            explicit.add(key)
        bonds[key] = order

    def add_atom(atom: Atom, pos: int, bracket: bool):
        nonlocal prev, pending
        idx = len(atoms)
        atoms.append(atom)
        bracketed.append(bracket)
        atom_pos.append(pos)
        if prev is not None:
            add_bond(prev, idx, pending[0] if pending else None, pending[1] if pending else pos)
        elif pending is not None:
            raise SmilesSyntaxError("bond symbol without a preceding atom", pending[1])
        pending = None
        prev = idx

    i, n = 0, len(s)
    while i < n:
        ch = s[i]
        pos = i + 1
        if ch == "[":
            end = s.find("]", i)
            if end < 0:
                raise UnbalancedBracket("unclosed '['", pos)
            add_atom(_parse_bracket(s[i + 1 : end], pos), pos, True)
            i = end + 1
            continue
        if ch == "]":
            raise UnbalancedBracket("unmatched ']'", pos)
        if ch.isalpha():
            two = s[i : i + 2]
            if two in ("Cl", "Br"):
                sym, i = two, i + 2
            else:
                sym, i = ch, i + 1
            if sym in ORGANIC and sym != "B":
                add_atom(Atom(sym, 0, 0, False), pos, False)
            elif sym in AROMATIC_ORGANIC:
                add_atom(Atom(sym.upper(), 0, 0, True), pos, False)
            else:
                raise UnknownElement(f"unknown element {sym!r}", pos)
            continue
        if ch in BOND_SYMBOLS:
            if pending is not None:
                raise SmilesSyntaxError("consecutive bond symbols", pos)
            pending = (ch, pos)
            i += 1
            continue
        if ch in "/\\":
            raise UnsupportedFeature("stereochemistry is not supported", pos)
        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch without a preceding atom", pos)
            if pending is not None:
                raise SmilesSyntaxError("bond symbol before '('", pending[1])
            branches.append((prev, pos))
            i += 1
            if i < n and s[i] == ")":
                raise SmilesSyntaxError("empty branch", i + 1)
            continue
        if ch == ")":
            if not branches:
                raise UnbalancedBracket("unmatched ')'", pos)
            if pending is not None:
                raise SmilesSyntaxError("dangling bond symbol", pending[1])
            prev = branches.pop()[0]
            i += 1
            continue
        if ch == ".":
            if pending is not None:
                raise SmilesSyntaxError("dangling bond symbol", pending[1])
            if branches:
                raise SmilesSyntaxError("'.' inside a branch", pos)
            prev = None
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if ch == "%":
                num = s[i + 1 : i + 3]
                if len(num) != 2 or not num.isdigit():
                    raise SmilesSyntaxError("'%' must be followed by two digits", pos)
                digit, i = int(num), i + 3
            else:
                digit, i = int(ch), i + 1
            if prev is None:
                raise SmilesSyntaxError("ring closure without a preceding atom", pos)
            sym = pending[0] if pending else None
            pending = None
            if digit in rings:
                other, osym, opos = rings.pop(digit)
                if sym is not None and osym is not None and sym != osym:
                    raise SmilesSyntaxError("conflicting ring-closure bond symbols", pos)
                add_bond(other, prev, sym or osym, pos)
            else:
                rings[digit] = (prev, sym, pos)
            continue
        raise SmilesSyntaxError(f"unexpected character {ch!r}", pos)

    if pending is not None:
        raise SmilesSyntaxError("dangling bond symbol", pending[1])
    if branches:
        raise UnbalancedBracket("unclosed '('", branches[-1][1])
    if rings:
        _, _, opos = min(rings.values(), key=lambda r: r[2])
        raise UnclosedRing("unclosed ring", opos)

    sums = [0] * len(atoms)
    for (a, b), order in bonds.items():
        v = 1 if order == AROMATIC else int(order)
        sums[a] += v
        sums[b] += v
    final = []
    for k, atom in enumerate(atoms):
        if not bracketed[k]:
            h = default_hydrogens(atom.element, sums[k], atom.aromatic)
            if h is None:
                raise ValenceViolation(f"atom {atom.element} exceeds its valence", atom_pos[k])
            atom = Atom(atom.element, 0, h, atom.aromatic)
        final.append(atom)
    try:
        return Molecule(
            tuple(final),
            tuple(Bond(a, b, o) for (a, b), o in bonds.items()),
            name,
        )
    except ValenceError as exc:
        k = int(str(exc).split()[1])
        raise ValenceViolation(str(exc), atom_pos[k]) from None


# -- writing -----------------------------------------------------------------

def _bond_code(order: float) -> int:
    return 4 if order == AROMATIC else int(order)


def _initial_invariant(mol: Molecule, k: int) -> tuple:
    a = mol.atoms[k]
    return (
        len(mol.neighbors[k]),
        ELEMENT_INDEX[a.element],
        a.charge,
        a.aromatic,
        a.hcount,
        k in mol.ring_atoms,
    )


def _dense_rank(keys: list) -> list[int]:
    order = sorted(set(keys))
    lookup = {key: r for r, key in enumerate(order)}
    return [lookup[key] for key in keys]


def _refine(mol: Molecule, ranks: list[int]) -> list[int]:
    while True:
        keys = [
            (ranks[k], tuple(sorted((ranks[w], _bond_code(o)) for w, o in mol.neighbors[k])))
            for k in range(len(mol.atoms))
        ]
        new = _dense_rank(keys)
        if len(set(new)) == len(set(ranks)):
            return new
        ranks = new


def canonical_ranks(mol: Molecule) -> list[int]:
    """Distinct canonical rank per atom.

    Iterative neighborhood refinement; remaining ties are broken by
    promoting one atom of the lowest tied class and refining again.
    """
    n = len(mol.atoms)
    if n == 0:
        return []
    ranks = _refine(mol, _dense_rank([_initial_invariant(mol, k) for k in range(n)]))
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = ranks.index(tied)
        ranks = [2 * r + (0 if k == chosen else 1) if r == tied else 2 * r for k, r in enumerate(ranks)]
        ranks = _refine(mol, _dense_rank(ranks))
    return ranks


def _atom_text(mol: Molecule, k: int) -> str:
    a = mol.atoms[k]
    sym = a.element.lower() if a.aromatic else a.element
    if a.charge == 0 and a.element in ORGANIC:
        if default_hydrogens(a.element, mol.bond_sum(k), a.aromatic) == a.hcount:
            return sym
    out = "[" + sym
    if a.hcount:
        out += "H" if a.hcount == 1 else f"H{a.hcount}"
    if a.charge:
        sign = "+" if a.charge > 0 else "-"
        out += sign if abs(a.charge) == 1 else f"{sign}{abs(a.charge)}"
    return out + "]"


def _bond_text(mol: Molecule, a: int, b: int, order: float) -> str:
    if order == 2.0:
        return "="
    if order == 3.0:
        return "#"
    if order == AROMATIC:
        return ""
    if mol.atoms[a].aromatic and mol.atoms[b].aromatic:
        return "-"
    return ""


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def _write(mol: Molecule, key: list) -> str:
    n = len(mol.atoms)
    order_of = {(min(a, b), max(a, b)): o for a in range(n) for b, o in mol.neighbors[a]}
    visited = [False] * n
    children: list[list[int]] = [[] for _ in range(n)]
    opens: list[list[int]] = [[] for _ in range(n)]
    closes: list[list[int]] = [[] for _ in range(n)]
    used: set[tuple[int, int]] = set()

    def dfs(v: int):
        visited[v] = True
        for w, _ in sorted(mol.neighbors[v], key=lambda p: key[p[0]]):
            e = (min(v, w), max(v, w))
            if e in used:
                continue
            used.add(e)
            if visited[w]:
                opens[w].append(v)
                closes[v].append(w)
            else:
                children[v].append(w)
                dfs(w)

    starts = []
    for k in sorted(range(n), key=lambda k: key[k]):
        if not visited[k]:
            starts.append(k)
            dfs(k)

    free: list[int] = []
    next_digit = [1]
    digit_of: dict[tuple[int, int], int] = {}
    out: list[str] = []

    def take_digit() -> int:
        if free:
            free.sort()
            return free.pop(0)
        d = next_digit[0]
        next_digit[0] += 1
        return d

    def emit(v: int):
        out.append(_atom_text(mol, v))
        for w in closes[v]:
            d = digit_of.pop((w, v))
            out.append(_ring_label(d))
            free.append(d)
        for w in opens[v]:
            d = take_digit()
            digit_of[(v, w)] = d
            out.append(_bond_text(mol, v, w, order_of[(min(v, w), max(v, w))]) + _ring_label(d))
        for idx, w in enumerate(children[v]):
            bond = _bond_text(mol, v, w, order_of[(min(v, w), max(v, w))])
            last = idx == len(children[v]) - 1
            if not last:
                out.append("(")
            out.append(bond)
            emit(w)
            if not last:
                out.append(")")

    for idx, s in enumerate(starts):
        if idx:
            out.append(".")
        emit(s)
    return "".join(out)


def write_smiles(mol: Molecule) -> str:
    """Canonical SMILES: identical text for any atom ordering of ``mol``."""
    return _write(mol, canonical_ranks(mol))


def random_smiles(mol: Molecule, rng: _random.Random) -> str:
    """A valid, non-canonical SMILES using a random traversal order."""
    key = list(range(len(mol.atoms)))
    rng.shuffle(key)
    return _write(mol, key)
