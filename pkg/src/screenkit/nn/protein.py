"""Protein sequence featurization: global and windowed k-mer composition."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"


class BadSequence(ValueError):
    pass


@dataclass(frozen=True)
class ProteinFeatures:
    global_: np.ndarray  # 20**k
    local: np.ndarray  # windows * 20**k, one composition block per window

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.global_, self.local])


def check_sequence(seq: str) -> str:
    seq = seq.strip()
    if not seq:
        raise BadSequence("empty protein sequence")
    for pos, ch in enumerate(seq, 1):
        if ch not in AMINO_ACIDS:
            raise BadSequence(f"character {ch!r} at position {pos} is not one of the 20 amino acids")
    return seq


def _kmer_index(k: int) -> dict[str, int]:
    return {"".join(p): i for i, p in enumerate(product(AMINO_ACIDS, repeat=k))}


def kmer_composition(seq: str, k: int = 2) -> np.ndarray:
    """L1-normalized k-mer counts; all zeros when the sequence is shorter than k."""
    index = _kmer_index(k)
    out = np.zeros(len(index))
    for i in range(len(seq) - k + 1):
        out[index[seq[i : i + k]]] += 1.0
    total = out.sum()
    return out / total if total else out


def protein_features(seq: str, k: int = 2, windows: int = 4) -> ProteinFeatures:
    seq = check_sequence(seq)
    bounds = np.linspace(0, len(seq), windows + 1).round().astype(int)
    local = [kmer_composition(seq[bounds[w] : bounds[w + 1]], k) for w in range(windows)]
    return ProteinFeatures(kmer_composition(seq, k), np.concatenate(local))
