"""Generation metrics: MMD over graph statistics and the optimization success rate."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..chem.molecule import ELEMENTS, Molecule

MAX_DEGREE = 4


class EmptySet(ValueError):
    pass


def graph_statistics(mol: Molecule) -> np.ndarray:
    """Degree histogram (0..4, higher clipped to 4) and element histogram as
    fractions of atoms, then the ring count."""
    n = len(mol.atoms)
    deg = np.zeros(MAX_DEGREE + 1)
    for k in range(n):
        deg[min(len(mol.neighbors[k]), MAX_DEGREE)] += 1
    elem = np.zeros(len(ELEMENTS))
    for a in mol.atoms:
        elem[ELEMENTS.index(a.element)] += 1
    return np.concatenate([deg / n, elem / n, [mol.ring_count]])


def median_bandwidth(points: np.ndarray) -> float:
    """Median pairwise Euclidean distance; 1.0 when there are no nonzero distances."""
    iu = np.triu_indices(len(points), 1)
    d = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(-1))[iu]
    med = float(np.median(d)) if d.size else 0.0
    return med if med > 0 else 1.0


def _within(k: np.ndarray) -> float:
    n = k.shape[0]
    if n == 1:
        return float(k[0, 0])
    return (k.sum() - np.trace(k)) / (n * (n - 1))


def mmd_metric(set_a: list[Molecule], set_b: list[Molecule], bandwidth: float | None = None) -> float:
    """Unbiased squared MMD with an RBF kernel exp(-d^2 / (2 s^2)), clamped at 0.

    A set of size one has no off-diagonal pairs; its within-set term is k(x, x) = 1.
    """
    if not set_a or not set_b:
        raise EmptySet("both molecule sets must be non-empty")
    fa = np.stack([graph_statistics(m) for m in set_a])
    fb = np.stack([graph_statistics(m) for m in set_b])
    s = median_bandwidth(np.concatenate([fa, fb])) if bandwidth is None else bandwidth
    if not s > 0:
        raise ValueError("bandwidth must be positive")

    def kern(x, y):
        d2 = ((x[:, None, :] - y[None, :, :]) ** 2).sum(-1)
        return np.exp(-d2 / (2 * s * s))

    value = _within(kern(fa, fa)) + _within(kern(fb, fb)) - 2.0 * kern(fa, fb).mean()
    return max(0.0, float(value))


@dataclass(frozen=True)
class SuccessResult:
    success: bool
    improvement: float
    threshold: float
    best_after: float


def optimize_success(
    before: list[Molecule],
    after: list[Molecule],
    scorer: Callable[[list[Molecule]], np.ndarray],
    policy: str = "max",
) -> SuccessResult:
    """Success when some molecule in ``after`` scores strictly above the
    threshold (the best ``before`` score under policy "max", their mean under
    "mean"); improvement = (mean after - mean before) / |mean before|."""
    if not after:
        raise EmptySet("no optimized molecules")
    if not before:
        raise EmptySet("no starting molecules")
    if policy not in ("max", "mean"):
        raise ValueError(f"unknown threshold policy {policy!r}")
    sb = np.asarray(scorer(before), dtype=float)
    sa = np.asarray(scorer(after), dtype=float)
    threshold = float(sb.max() if policy == "max" else sb.mean())
    mb, ma = math.fsum(sb) / len(sb), math.fsum(sa) / len(sa)
    if mb == 0:
        improvement = 0.0 if ma == 0 else math.copysign(math.inf, ma)
    else:
        improvement = (ma - mb) / abs(mb)
    return SuccessResult(bool((sa > threshold).any()), improvement, threshold, float(sa.max()))
