"""Exact empirical 1-Wasserstein distances and Top-K source-domain selection.

Uniform weights 1/n and 1/m are scaled to integer supplies (m per source
point, n per target point), so the transportation simplex pivots on exact
integer flows; only costs are floating point.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

MAX_POINTS = 256


class DimensionMismatch(ValueError):
    pass


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class DomainSample:
    id: str
    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 1:
            raise ValueError(f"domain {self.id!r} is empty")
        if not np.isfinite(pts).all():
            raise ValueError(f"domain {self.id!r} has non-finite coordinates")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_values(cls, id: str, values) -> DomainSample:
        """1-D sample from a flat list of values."""
        return cls(id, np.asarray(values, dtype=float).reshape(-1, 1))

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class Coupling:
    plan: np.ndarray


def cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _least_cost(cost: np.ndarray, supply: np.ndarray, demand: np.ndarray):
    """Initial basic solution by the matrix-minimum rule.

    Exactly one row or column is retired per step, so the n + m - 1 chosen
    cells form a spanning tree even when steps are degenerate.
    """
    s, d = supply.copy(), demand.copy()
    n, m = len(s), len(d)
    flow = np.zeros((n, m), dtype=np.int64)
    work = cost.astype(float).copy()
    basis = []
    rows_left, cols_left = n, m
    for _ in range(n + m - 1):
        i, j = divmod(int(np.argmin(work)), m)
        x = min(s[i], d[j])
        flow[i, j] = x
        basis.append((i, j))
        s[i] -= x
        d[j] -= x
        if s[i] == 0 and rows_left > 1:
            work[i, :] = np.inf
            rows_left -= 1
        else:
            work[:, j] = np.inf
            cols_left -= 1
    return flow, basis


def _potentials(cost, basis, n, m):
    rows: list[list[int]] = [[] for _ in range(n)]
    cols: list[list[int]] = [[] for _ in range(m)]
    for i, j in basis:
        rows[i].append(j)
        cols[j].append(i)
    u = np.full(n, np.nan)
    v = np.full(m, np.nan)
    u[0] = 0.0
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        if kind == "r":
            for j in rows[k]:
                if np.isnan(v[j]):
                    v[j] = cost[k, j] - u[k]
                    queue.append(("c", j))
        else:
            for i in cols[k]:
                if np.isnan(u[i]):
                    u[i] = cost[i, k] - v[k]
                    queue.append(("r", i))
    return u, v, rows, cols


def _tree_path(rows, cols, start_row: int, end_col: int) -> list[tuple[int, int]]:
    """Basis cells on the tree path from row ``start_row`` to column ``end_col``."""
    parent: dict[tuple[str, int], tuple[str, int] | None] = {("r", start_row): None}
    queue = deque([("r", start_row)])
    target = ("c", end_col)
    while queue:
        node = queue.popleft()
        if node == target:
            break
        kind, k = node
        nbrs = [("c", j) for j in rows[k]] if kind == "r" else [("r", i) for i in cols[k]]
        for nb in nbrs:
            if nb not in parent:
                parent[nb] = node
                queue.append(nb)
    path = []
    node = target
    while parent[node] is not None:
        prev = parent[node]
        cell = (prev[1], node[1]) if prev[0] == "r" else (node[1], prev[1])
        path.append(cell)
        node = prev
    path.reverse()
    return path


def transport(cost: np.ndarray, supply, demand, max_iter: int = 200_000) -> np.ndarray:
    """Optimal integer flow for a balanced transportation problem."""
    supply = np.asarray(supply, dtype=np.int64)
    demand = np.asarray(demand, dtype=np.int64)
    if supply.sum() != demand.sum():
        raise ValueError("unbalanced transportation problem")
    n, m = cost.shape
    flow, basis = _least_cost(cost, supply, demand)
    in_basis = np.zeros((n, m), dtype=bool)
    for c in basis:
        in_basis[c] = True
    tol = 1e-12 * max(1.0, float(np.abs(cost).max(initial=0.0)))
    degenerate_run = 0
    for _ in range(max_iter):
        u, v, rows, cols = _potentials(cost, basis, n, m)
        reduced = cost - u[:, None] - v[None, :]
        reduced[in_basis] = 0.0
        if degenerate_run > 50:
            # Bland's rule: first improving cell in index order
            neg = np.flatnonzero(reduced.ravel() < -tol)
            if neg.size == 0:
                return flow
            flat = int(neg[0])
        else:
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -tol:
                return flow
        ie, je = divmod(flat, m)
        path = _tree_path(rows, cols, ie, je)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(flow[c] for c in minus)
        leave = min((c for c in minus if flow[c] == theta), key=lambda c: c[0] * m + c[1])
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        flow[ie, je] += theta
        degenerate_run = degenerate_run + 1 if theta == 0 else 0
        basis.remove(leave)
        in_basis[leave] = False
        basis.append((ie, je))
        in_basis[ie, je] = True
    raise RuntimeError("transportation simplex did not converge")


def wasserstein_distance(a: DomainSample, b: DomainSample, return_coupling: bool = False):
    """Exact W1 between uniform empirical measures under Euclidean cost."""
    if a.points.shape[1] != b.points.shape[1]:
        raise DimensionMismatch(f"descriptor dimensions differ: {a.points.shape[1]} vs {b.points.shape[1]}")
    n, m = a.n, b.n
    if n > MAX_POINTS or m > MAX_POINTS:
        raise TooLarge(f"exact solver handles at most {MAX_POINTS} points per domain")
    cost = cost_matrix(a.points, b.points)
    flow = transport(cost, np.full(n, m), np.full(m, n))
    nz = np.nonzero(flow)
    dist = math.fsum((flow[nz] * cost[nz]).tolist()) / (n * m)
    if return_coupling:
        return dist, Coupling(flow / (n * m))
    return dist


def select_sources(target: DomainSample, sources: list[DomainSample], k: int) -> list[tuple[str, float]]:
    """Sources sorted by distance to ``target`` (stable), first ``k`` kept."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = [(s.id, wasserstein_distance(target, s)) for s in sources]
    order = sorted(range(len(scored)), key=lambda i: scored[i][1])
    return [scored[i] for i in order[:k]]


def fingerprint_domain(id: str, mols, radius: int = 2, width: int = 2048) -> DomainSample:
    from .similarity import morgan_fingerprint

    return DomainSample(id, np.stack([morgan_fingerprint(m, radius, width).to_array() for m in mols]))
