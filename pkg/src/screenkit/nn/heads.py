"""Task heads on top of the encoder: property regression, drug-target
affinity with gated channel fusion, symmetric drug-pair interaction, and
the contrastive alignment loss against numeric value embeddings."""

from __future__ import annotations

import numpy as np

from .autograd import (
    Tensor,
    absolute,
    add,
    concat,
    matmul,
    mul,
    normalize_rows,
    relu,
    scale,
    sigmoid,
    softmax_cross_entropy,
    take,
    transpose,
)
from .mpnn import GraphBatch, encode, init_encoder
from .params import ModelParams

TASKS = ("mpp", "dta", "ddi")

DEFAULTS = {
    "hidden": 32,
    "layers": 2,
    "embed": 32,
    "head_hidden": 32,
    "extra": 0,
    "kmer_k": 2,
    "windows": 4,
    "channel": 16,
    "mode": "regression",
    "kg_dim": 0,
    "align_weight": 0.5,
    "temperature": 0.1,
}


class BatchMismatch(ValueError):
    pass


def init_model(task: str, seed: int = 0, **overrides) -> ModelParams:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    unknown = set(overrides) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown model options: {sorted(unknown)}")
    cfg = {**DEFAULTS, **overrides, "task": task, "seed": seed}
    rng = np.random.default_rng(seed)
    params = ModelParams(cfg)
    h, emb, hh = cfg["hidden"], cfg["embed"], cfg["head_hidden"]
    init_encoder(params, rng, h, cfg["layers"], emb)
    if task == "mpp":
        params.add_dense("mpp.hidden", emb + cfg["extra"], hh, rng)
        params.add_dense("mpp.out", hh, 1, rng)
        if cfg["kg_dim"]:
            params.add_dense("mpp.align", emb, cfg["kg_dim"], rng)
    elif task == "dta":
        n_kmer = 20 ** cfg["kmer_k"]
        c = cfg["channel"]
        params.add_dense("dta.drug", emb, c, rng)
        params.add_dense("dta.global", n_kmer, c, rng)
        params.add_dense("dta.local", n_kmer * cfg["windows"], c, rng)
        params.add_array("dta.gate", np.zeros(3))
        params.add_dense("dta.hidden", 3 * c, hh, rng)
        params.add_dense("dta.out", hh, 1, rng)
    else:
        params.add_dense("ddi.hidden", 2 * emb, hh, rng)
        params.add_dense("ddi.out", hh, 1, rng)
    return params


def _mlp_out(params: ModelParams, prefix: str, x: Tensor) -> Tensor:
    hidden = relu(params.dense(f"{prefix}.hidden", x))
    out = params.dense(f"{prefix}.out", hidden)
    return Tensor(out.value[:, 0], parents=(out,), backward=lambda g: (g[:, None],))


def mpp_forward(params: ModelParams, batch: GraphBatch, extra: np.ndarray | None = None) -> tuple[Tensor, Tensor]:
    """Predictions (one per graph) and the graph embeddings they came from."""
    emb = encode(params, batch)
    x = emb
    if params.config["extra"]:
        if extra is None or extra.shape != (batch.n_graphs, params.config["extra"]):
            raise BatchMismatch(f"expected {params.config['extra']} extra features per molecule")
        x = concat([emb, Tensor(extra)])
    return _mlp_out(params, "mpp", x), emb


def dta_forward(params: ModelParams, batch: GraphBatch, proteins: np.ndarray) -> Tensor:
    """``proteins`` rows are ProteinFeatures vectors (global block then local blocks)."""
    n_kmer = 20 ** params.config["kmer_k"]
    if proteins.shape[0] != batch.n_graphs:
        raise BatchMismatch("one protein row per drug is required")
    drug = relu(params.dense("dta.drug", encode(params, batch)))
    glob = relu(params.dense("dta.global", Tensor(proteins[:, :n_kmer])))
    local = relu(params.dense("dta.local", Tensor(proteins[:, n_kmer:])))
    gate = sigmoid(params["dta.gate"])
    channels = [mul(ch, take(gate, np.array([k]))) for k, ch in enumerate((drug, glob, local))]
    return _mlp_out(params, "dta", concat(channels))


def pair_features(ea: Tensor, eb: Tensor) -> Tensor:
    """|a - b| and a * b: both unchanged when a and b swap."""
    return concat([absolute(add(ea, scale(eb, -1.0))), mul(ea, eb)])


def ddi_forward(params: ModelParams, batch_a: GraphBatch, batch_b: GraphBatch) -> Tensor:
    if batch_a.n_graphs != batch_b.n_graphs:
        raise BatchMismatch("pair batches differ in size")
    return _mlp_out(params, "ddi", pair_features(encode(params, batch_a), encode(params, batch_b)))


def contrastive_align_loss(pred, values, temperature: float = 0.1) -> Tensor:
    """Symmetric InfoNCE over cosine similarities, matched rows as positives."""
    pred = pred if isinstance(pred, Tensor) else Tensor(pred)
    values = values if isinstance(values, Tensor) else Tensor(values)
    if pred.shape != values.shape or pred.value.ndim != 2:
        raise BatchMismatch(f"embedding shapes differ: {pred.shape} vs {values.shape}")
    if not temperature > 0:
        raise ValueError("temperature must be positive")
    sims = scale(matmul(normalize_rows(pred), transpose(normalize_rows(values))), 1.0 / temperature)
    target = np.arange(pred.shape[0])
    rows = softmax_cross_entropy(sims, target)
    cols = softmax_cross_entropy(transpose(sims), target)
    return scale(add(rows, cols), 0.5)
