"""Continuous graph state (X, A) and closed-form forward noising."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..chem.molecule import Molecule
from .schedule import NoiseSchedule

VOCAB = ("C", "N", "O", "F")
EMPTY = "*"  # extra one-hot column marking an unused node slot


@dataclass
class DiffusionState:
    X: np.ndarray  # n x (len(vocab) + 1)
    A: np.ndarray  # n x n, symmetric, zero diagonal
    t: int = 0
    node_mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        n = self.X.shape[0]
        if self.A.shape != (n, n):
            raise ValueError(f"A has shape {self.A.shape}, expected ({n}, {n})")
        if self.node_mask is None:
            self.node_mask = np.ones(n, dtype=bool)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.A, self.A.T))


def encode_molecule(mol: Molecule, n_nodes: int, vocab=VOCAB) -> DiffusionState:
    """One-hot elements plus an 'empty' column for unused slots; bond orders in A.

    Aromatic bonds are not representable; pass Kekule forms.
    """
    n = len(mol.atoms)
    if n > n_nodes:
        raise ValueError(f"molecule has {n} atoms, state holds {n_nodes}")
    X = np.zeros((n_nodes, len(vocab) + 1))
    for k, a in enumerate(mol.atoms):
        if a.element not in vocab:
            raise ValueError(f"element {a.element} outside vocabulary {vocab}")
        if a.aromatic or a.charge:
            raise ValueError("only neutral Kekule molecules can be encoded")
        X[k, vocab.index(a.element)] = 1.0
    X[n:, len(vocab)] = 1.0
    A = np.zeros((n_nodes, n_nodes))
    for b in mol.bonds:
        A[b.i, b.j] = A[b.j, b.i] = b.order
    return DiffusionState(X, A)


def symmetric_noise(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normal upper triangle mirrored below; zero diagonal. ``shape`` is (..., n, n)."""
    n = shape[-1]
    iu = np.triu_indices(n, 1)
    z = np.zeros(shape)
    z[..., iu[0], iu[1]] = rng.standard_normal(shape[:-2] + (len(iu[0]),))
    return z + np.swapaxes(z, -1, -2)


def noise_to(X0, A0, t: int, schedule: NoiseSchedule, rng: np.random.Generator):
    """x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps for X and (symmetric) A."""
    ab = schedule.alpha_bar[t]
    eps_x = rng.standard_normal(np.shape(X0))
    eps_a = symmetric_noise(rng, np.shape(A0))
    return np.sqrt(ab) * X0 + np.sqrt(1 - ab) * eps_x, np.sqrt(ab) * A0 + np.sqrt(1 - ab) * eps_a, eps_x, eps_a


def forward_noise(state0: DiffusionState, t: int, schedule: NoiseSchedule, seed) -> tuple[DiffusionState, np.ndarray, np.ndarray]:
    """Jump straight to step ``t``; returns the noised state and the drawn (eps_X, eps_A)."""
    schedule.check(t)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    X, A, ex, ea = noise_to(state0.X, state0.A, t, schedule, rng)
    return DiffusionState(X, A, t, state0.node_mask.copy()), ex, ea


def reconstruct(state_t: DiffusionState, eps_x: np.ndarray, eps_a: np.ndarray, schedule: NoiseSchedule):
    """Invert :func:`forward_noise` given the noise: x_0 = (x_t - sqrt(1 - abar) eps) / sqrt(abar)."""
    ab = schedule.alpha_bar[state_t.t]
    X = (state_t.X - np.sqrt(1 - ab) * eps_x) / np.sqrt(ab)
    A = (state_t.A - np.sqrt(1 - ab) * eps_a) / np.sqrt(ab)
    return X, A
