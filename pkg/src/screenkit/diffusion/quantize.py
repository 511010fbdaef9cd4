"""Continuous state -> Molecule: argmax elements, banded bond orders, valence repair."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..chem.molecule import VALENCES, Molecule
from .state import VOCAB, DiffusionState

MAX_ORDER = 3


@dataclass(frozen=True)
class Rejection:
    reason: str  # "EmptyGraph", "NonFinite" or "ValenceUnrepairable"
    detail: str = ""


def bond_orders(A: np.ndarray) -> np.ndarray:
    """Nearest integer order in 0..3 with thresholds at k + 0.5, read from the upper triangle."""
    upper = np.triu(np.clip(np.floor(A + 0.5), 0, MAX_ORDER), k=1)
    return (upper + upper.T).astype(int)


def _quantize(state: DiffusionState, vocab, protected) -> tuple[Molecule | Rejection, int]:
    if not (np.isfinite(state.X).all() and np.isfinite(state.A).all()):
        return Rejection("NonFinite", "state contains inf or nan"), 0
    labels = np.argmax(state.X, axis=1)
    keep = [k for k in range(len(labels)) if labels[k] < len(vocab) and state.node_mask[k]]
    if not keep:
        return Rejection("EmptyGraph", "every node decoded as empty"), 0
    elements = [vocab[labels[k]] for k in keep]
    A = state.A[np.ix_(keep, keep)]
    orders = bond_orders(A)
    prot = np.zeros_like(orders, dtype=bool) if protected is None else np.asarray(protected, bool)[np.ix_(keep, keep)]
    repairs = 0
    n = len(keep)
    for v in range(n):
        limit = max(VALENCES[elements[v]])
        while orders[v].sum() > limit:
            cands = [w for w in range(n) if orders[v, w] > 0 and not prot[v, w]]
            if not cands:
                return Rejection("ValenceUnrepairable", f"atom {keep[v]} ({elements[v]}) exceeds valence {limit}"), repairs
            # weakest bond: smallest margin above the threshold of its current band
            w = min(cands, key=lambda u: (A[v, u] - (orders[v, u] - 0.5), u))
            orders[v, w] -= 1
            orders[w, v] -= 1
            repairs += 1
    bonds = [(i, j, float(orders[i, j])) for i in range(n) for j in range(i + 1, n) if orders[i, j]]
    return Molecule.from_graph(elements, bonds), repairs


def quantize_graph(state: DiffusionState, vocab=VOCAB, protected: np.ndarray | None = None) -> Molecule | Rejection:
    """Decode one state; ``protected`` marks node pairs whose bond order repair may not touch."""
    return _quantize(state, tuple(vocab), protected)[0]


def quantize_batch(states, vocab=VOCAB, protected=None) -> tuple[list[Molecule | Rejection], dict]:
    out, reasons, repaired = [], Counter(), 0
    for s in states:
        res, repairs = _quantize(s, tuple(vocab), protected)
        out.append(res)
        if isinstance(res, Rejection):
            reasons[res.reason] += 1
        elif repairs:
            repaired += 1
    stats = {
        "total": len(out),
        "accepted": len(out) - sum(reasons.values()),
        "repaired": repaired,
        "rejected": dict(sorted(reasons.items())),
    }
    return out, stats
