"""Fingerprints and the three molecular similarity functions.

Fingerprint hashing uses the SplitMix64 finalizer so bit positions are
reproducible across platforms and Python versions::

    mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
             z = (z ^ (z >> 27)) * 0x94D049BB133111EB
             return z ^ (z >> 31)                      (all mod 2**64)

    hash_seq(v1..vk): h = 0x9E3779B97F4A7C15
                      for v in v1..vk: h = mix((h ^ v) + 0x9E3779B97F4A7C15)

The radius-0 environment of an atom hashes (element index + 1, charge,
aromatic, ring membership). Radius r hashes (r, previous hash, then the
sorted (bond code, neighbor hash) pairs), with bond codes 1, 2, 3 and 4 for
aromatic. Every environment sets bit ``hash % width``.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .chem.molecule import AROMATIC, ELEMENT_INDEX, Molecule

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class WidthMismatch(ValueError):
    pass


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def hash_seq(values) -> int:
    h = GOLDEN
    for v in values:
        h = mix64(((h ^ (v & MASK64)) + GOLDEN) & MASK64)
    return h


@dataclass(frozen=True)
class Fingerprint:
    bits: int
    width: int = 2048
    radius: int = 2

    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> list[int]:
        return [k for k in range(self.width) if self.bits >> k & 1]

    def to_array(self) -> np.ndarray:
        arr = np.zeros(self.width)
        arr[self.on_bits()] = 1.0
        return arr

    @classmethod
    def from_indices(cls, indices, width: int = 2048, radius: int = 2) -> Fingerprint:
        bits = 0
        for k in indices:
            bits |= 1 << k
        return cls(bits, width, radius)


def _bond_code(order: float) -> int:
    return 4 if order == AROMATIC else int(order)


def morgan_fingerprint(mol: Molecule, radius: int = 2, width: int = 2048) -> Fingerprint:
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if width < 64 or width & (width - 1):
        raise ValueError("width must be a power of two >= 64")
    rings = mol.ring_atoms
    env = [
        hash_seq((ELEMENT_INDEX[a.element] + 1, a.charge, int(a.aromatic), int(k in rings)))
        for k, a in enumerate(mol.atoms)
    ]
    bits = 0
    for h in env:
        bits |= 1 << (h % width)
    for r in range(1, radius + 1):
        new = []
        for k in range(len(mol.atoms)):
            pairs = sorted((_bond_code(o), env[w]) for w, o in mol.neighbors[k])
            new.append(hash_seq([r, env[k], *(x for p in pairs for x in p)]))
        env = new
        for h in env:
            bits |= 1 << (h % width)
    return Fingerprint(bits, width, radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|a AND b| / |a OR b|; 1.0 when both are empty."""
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths differ: {a.width} vs {b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def edit_similarity(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def _digest(text: str) -> str:
    return hashlib.blake2b(text.encode(), digest_size=10).hexdigest()


def wl_features(mol: Molecule, iterations: int = 3) -> Counter:
    """Label histogram accumulated over WL iterations 0..iterations."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    labels = [f"{a.element}{a.charge:+d}{'a' if a.aromatic else ''}" for a in mol.atoms]
    feats = Counter(f"0:{lab}" for lab in labels)
    for it in range(1, iterations + 1):
        labels = [
            _digest(labels[k] + "|" + ",".join(sorted(labels[w] for w, _ in mol.neighbors[k])))
            for k in range(len(mol.atoms))
        ]
        feats.update(f"{it}:{lab}" for lab in labels)
    return feats


def wl_kernel(fa: Counter, fb: Counter) -> int:
    if len(fb) < len(fa):
        fa, fb = fb, fa
    return sum(c * fb[k] for k, c in fa.items())


def wl_similarity(a: Molecule, b: Molecule, iterations: int = 3) -> float:
    """Normalized WL subtree kernel k(a,b) / sqrt(k(a,a) k(b,b))."""
    fa, fb = wl_features(a, iterations), wl_features(b, iterations)
    kaa, kbb = wl_kernel(fa, fa), wl_kernel(fb, fb)
    if kaa == 0 or kbb == 0:
        return 1.0 if kaa == kbb else 0.0
    return min(1.0, wl_kernel(fa, fb) / math.sqrt(kaa * kbb))


def similarity_matrix(rows, cols, fn) -> np.ndarray:
    out = np.empty((len(rows), len(cols)))
    for i, a in enumerate(rows):
        for j, b in enumerate(cols):
            out[i, j] = fn(a, b)
    return out
