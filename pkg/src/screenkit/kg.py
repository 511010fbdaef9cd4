"""Numeric knowledge graph: a chain of value entities joined by a successor relation.

The objective is the directional hinge

    sum over (h, l, t) of  max(0, gamma + d(h + l, t) - d(t + l, h))

with d the L1 or L2 norm of the difference. There is no corrupted-triplet
sampling; the reversed triplet plays the role of the negative.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAX_GRID_STEPS = 10_000
TABLE_MAGIC = b"SKKG"


class BadRange(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class OutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class NumericKG:
    values: np.ndarray
    relations: tuple[str, ...] = ("successor",)
    triplets: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=int))

    @property
    def n_entities(self) -> int:
        return len(self.values)


@dataclass
class EmbeddingTable:
    entities: np.ndarray
    relations: np.ndarray
    loss_trace: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.entities.shape[1]


@dataclass(frozen=True)
class MarginConfig:
    gamma: float = 1.0
    metric: str = "L1"
    lr: float = 0.01
    epochs: int = 500
    seed: int = 0
    dim: int = 8
    norm_bound: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.metric.upper() not in ("L1", "L2"):
            raise ValueError(f"metric must be L1 or L2, got {self.metric!r}")


def build_numeric_kg(lo: float, hi: float, step: float) -> NumericKG:
    if not (lo < hi and step > 0):
        raise BadRange(f"need min < max and step > 0, got ({lo}, {hi}, {step})")
    span = (hi - lo) / step
    if span > MAX_GRID_STEPS * (1 + 1e-9):
        raise BadRange(f"grid of {span:.0f} steps exceeds the {MAX_GRID_STEPS} limit")
    n_steps = int(math.floor(span + 1e-9))
    values = lo + step * np.arange(n_steps + 1)
    idx = np.arange(n_steps)
    triplets = np.stack([idx, np.zeros_like(idx), idx + 1], axis=1)
    return NumericKG(values, ("successor",), triplets)


def _dist(x: np.ndarray, metric: str) -> np.ndarray:
    if metric.upper() == "L1":
        return np.abs(x).sum(axis=-1)
    return np.sqrt((x * x).sum(axis=-1))


def _check(kg: NumericKG, emb: EmbeddingTable):
    if emb.entities.shape[0] != kg.n_entities or emb.relations.shape[0] != len(kg.relations):
        raise DimensionMismatch("embedding table does not match the graph")
    if emb.entities.shape[1] != emb.relations.shape[1]:
        raise DimensionMismatch("entity and relation dimensions differ")


def hinge_terms(kg: NumericKG, emb: EmbeddingTable, cfg: MarginConfig) -> np.ndarray:
    """Per-triplet gamma + d(h+l, t) - d(t+l, h), before clipping."""
    _check(kg, emb)
    if len(kg.triplets) == 0:
        return np.zeros(0)
    h = emb.entities[kg.triplets[:, 0]]
    r = emb.relations[kg.triplets[:, 1]]
    t = emb.entities[kg.triplets[:, 2]]
    return cfg.gamma + _dist(h + r - t, cfg.metric) - _dist(t + r - h, cfg.metric)


def kg_loss(kg: NumericKG, emb: EmbeddingTable, cfg: MarginConfig) -> float:
    return float(np.maximum(hinge_terms(kg, emb, cfg), 0.0).sum())


def _dist_grad(x: np.ndarray, metric: str) -> np.ndarray:
    if metric.upper() == "L1":
        return np.sign(x)
    norm = np.sqrt((x * x).sum(axis=-1, keepdims=True))
    return np.divide(x, norm, out=np.zeros_like(x), where=norm > 0)


def kg_gradients(kg: NumericKG, emb: EmbeddingTable, cfg: MarginConfig) -> tuple[np.ndarray, np.ndarray]:
    """Subgradient of :func:`kg_loss` with respect to entities and relations."""
    g_ent = np.zeros_like(emb.entities)
    g_rel = np.zeros_like(emb.relations)
    terms = hinge_terms(kg, emb, cfg)
    active = terms > 0
    if not active.any():
        return g_ent, g_rel
    tri = kg.triplets[active]
    h, r, t = emb.entities[tri[:, 0]], emb.relations[tri[:, 1]], emb.entities[tri[:, 2]]
    gp = _dist_grad(h + r - t, cfg.metric)  # d/d(h+r-t) of the positive distance
    gn = _dist_grad(t + r - h, cfg.metric)  # d/d(t+r-h) of the reversed distance
    # loss = d(h+r-t) - d(t+r-h)
    np.add.at(g_ent, tri[:, 0], gp + gn)
    np.add.at(g_ent, tri[:, 2], -gp - gn)
    np.add.at(g_rel, tri[:, 1], gp - gn)
    return g_ent, g_rel


def _project(rows: np.ndarray, bound: float) -> np.ndarray:
    norms = np.sqrt((rows * rows).sum(axis=1, keepdims=True))
    scale = np.minimum(1.0, bound / np.maximum(norms, 1e-300))
    return rows * scale


def init_table(kg: NumericKG, cfg: MarginConfig) -> EmbeddingTable:
    """Uniform init in +-6/sqrt(dim); entity rows then projected into the norm ball."""
    rng = np.random.default_rng(cfg.seed)
    bound = 6.0 / math.sqrt(cfg.dim)
    ent = rng.uniform(-bound, bound, size=(kg.n_entities, cfg.dim))
    rel = rng.uniform(-bound, bound, size=(len(kg.relations), cfg.dim))
    return EmbeddingTable(_project(ent, cfg.norm_bound), rel)


def train_kg(kg: NumericKG, cfg: MarginConfig = MarginConfig()) -> EmbeddingTable:
    """Full-batch subgradient descent with per-epoch entity norm projection."""
    table = init_table(kg, cfg)
    ent, rel = table.entities.copy(), table.relations.copy()
    trace = []
    for _ in range(cfg.epochs):
        cur = EmbeddingTable(ent, rel)
        trace.append(kg_loss(kg, cur, cfg))
        g_ent, g_rel = kg_gradients(kg, cur, cfg)
        ent = _project(ent - cfg.lr * g_ent, cfg.norm_bound)
        rel = rel - cfg.lr * g_rel
    final = EmbeddingTable(ent, rel)
    final.loss_trace = trace + [kg_loss(kg, final, cfg)]
    return final


def relation_projection(emb: EmbeddingTable, relation: int = 0) -> np.ndarray:
    """Entity coordinates projected onto the unit relation direction."""
    r = emb.relations[relation]
    return emb.entities @ (r / np.linalg.norm(r))


def directional_fraction(kg: NumericKG, emb: EmbeddingTable, cfg: MarginConfig) -> float:
    """Share of triplets with d(h+l, t) < d(t+l, h)."""
    if len(kg.triplets) == 0:
        return 1.0
    terms = hinge_terms(kg, emb, cfg) - cfg.gamma
    return float((terms < 0).mean())


def embed_value(emb: EmbeddingTable, kg: NumericKG, v: float) -> np.ndarray:
    """Linear interpolation between the two grid entities bracketing ``v``."""
    vals = kg.values
    tol = 1e-9 * max(1.0, abs(vals[-1] - vals[0]))
    if v < vals[0] - tol or v > vals[-1] + tol:
        raise OutOfRange(f"{v} outside [{vals[0]}, {vals[-1]}]")
    v = min(max(v, vals[0]), vals[-1])
    hi = int(np.searchsorted(vals, v, side="left"))
    if hi < len(vals) and abs(vals[hi] - v) <= tol:
        return emb.entities[hi].copy()
    if hi > 0 and abs(vals[hi - 1] - v) <= tol:
        return emb.entities[hi - 1].copy()
    lo = hi - 1
    w = (v - vals[lo]) / (vals[hi] - vals[lo])
    return (1.0 - w) * emb.entities[lo] + w * emb.entities[hi]


# -- binary table format -----------------------------------------------------
# header: magic "SKKG", u32 version=1, u32 dim, u32 n_entities, u32 n_relations,
# u32 meta length, then the meta JSON bytes,
# then float32 little-endian: entity values (n_entities), entity rows
# (n_entities * dim), relation rows (n_relations * dim).


def save_table(path, emb: EmbeddingTable, kg: NumericKG, meta: bytes = b""):
    with open(path, "wb") as fh:
        fh.write(table_bytes(emb, kg, meta))


def table_bytes(emb: EmbeddingTable, kg: NumericKG, meta: bytes = b"") -> bytes:
    head = TABLE_MAGIC + struct.pack("<IIIII", 1, emb.dim, kg.n_entities, len(kg.relations), len(meta))
    body = (
        np.asarray(kg.values, dtype="<f4").tobytes()
        + np.asarray(emb.entities, dtype="<f4").tobytes()
        + np.asarray(emb.relations, dtype="<f4").tobytes()
    )
    return head + meta + body


def load_table(path) -> tuple[EmbeddingTable, NumericKG]:
    data = Path(path).read_bytes()
    if data[:4] != TABLE_MAGIC:
        raise ValueError(f"{path}: not a knowledge-graph table")
    version, dim, n_ent, n_rel, meta_len = struct.unpack("<IIIII", data[4:24])
    if version != 1:
        raise ValueError(f"{path}: unsupported table version {version}")
    off = 24 + meta_len
    arr = np.frombuffer(data[off:], dtype="<f4").astype(np.float64)
    values = arr[:n_ent]
    ent = arr[n_ent : n_ent + n_ent * dim].reshape(n_ent, dim)
    rel = arr[n_ent + n_ent * dim : n_ent + (n_ent + n_rel) * dim].reshape(n_rel, dim)
    idx = np.arange(n_ent - 1)
    kg = NumericKG(values, ("successor",)[:n_rel] or ("successor",), np.stack([idx, 0 * idx, idx + 1], axis=1))
    return EmbeddingTable(ent, rel), kg
