"""Seeded mini-batch training, batched prediction, and library screening."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..chem.molecule import Molecule
from ..chem.smiles import write_smiles
from ..chem.tensors import to_tensors
from ..kg import EmbeddingTable, NumericKG, embed_value
from .autograd import Tensor, add, bce_with_logits, mae, mse, scale
from .data import DdiData, DtaData, EmptyDataset, MppData
from .heads import contrastive_align_loss, ddi_forward, dta_forward, init_model, mpp_forward
from .mpnn import make_batch
from .params import Adam, ModelParams, UntrainedModel
from .protein import check_sequence, protein_features

PREDICT_CHUNK = 256


@dataclass
class TrainConfig:
    seed: int = 0
    epochs: int = 30
    lr: float = 1e-3
    batch_size: int = 32
    model: dict = field(default_factory=dict)


class _Prepared:
    """Per-sample tensors cached once so each epoch only slices and batches."""

    def __init__(self, task: str, data, params: ModelParams, kg=None):
        self.task = task
        cfg = params.config
        if task == "mpp":
            self.graphs = [to_tensors(m) for m in data.mols]
            self.extra = data.extra
            self.values = None
            if kg is not None:
                table, graph = kg
                self.values = np.stack([embed_value(table, graph, float(y)) for y in data.labels])
        elif task == "dta":
            self.graphs = [to_tensors(m) for m in data.mols]
            cache = {}
            for s in data.sequences:
                if s not in cache:
                    cache[s] = protein_features(s, cfg["kmer_k"], cfg["windows"]).vector
            self.proteins = np.stack([cache[s] for s in data.sequences])
        else:
            self.graphs = [to_tensors(m) for m in data.mols_a]
            self.graphs_b = [to_tensors(m) for m in data.mols_b]
        self.labels = np.asarray(data.labels, dtype=float)

    def __len__(self):
        return len(self.labels)

    def outputs(self, params: ModelParams, idx: np.ndarray) -> tuple[Tensor, Tensor | None]:
        batch = make_batch([self.graphs[k] for k in idx])
        if self.task == "mpp":
            extra = None if self.extra is None else self.extra[idx]
            pred, emb = mpp_forward(params, batch, extra)
            return _unstandardize(params, pred), emb
        if self.task == "dta":
            return _unstandardize(params, dta_forward(params, batch, self.proteins[idx])), None
        return ddi_forward(params, batch, make_batch([self.graphs_b[k] for k in idx])), None

    def loss(self, params: ModelParams, idx: np.ndarray) -> Tensor:
        pred, emb = self.outputs(params, idx)
        y = self.labels[idx]
        cfg = params.config
        if self.task == "mpp":
            loss = mae(pred, y)
            if self.values is not None and len(idx) > 1:
                aligned = params.dense("mpp.align", emb)
                align = contrastive_align_loss(aligned, self.values[idx], cfg["temperature"])
                loss = add(loss, scale(align, cfg["align_weight"]))
            return loss
        if self.task == "ddi" or cfg["mode"] == "classification":
            return bce_with_logits(pred, y)
        return mse(pred, y)


def _unstandardize(params: ModelParams, raw: Tensor) -> Tensor:
    """Regression heads predict in label-standardized units; map back to label units."""
    cfg = params.config
    if "label_scale" not in cfg:
        return raw
    return add(scale(raw, cfg["label_scale"]), cfg["label_shift"])


def _check_data(task: str, data):
    kinds = {"mpp": MppData, "dta": DtaData, "ddi": DdiData}
    if not isinstance(data, kinds[task]):
        raise TypeError(f"task {task} expects {kinds[task].__name__}")
    if len(data.labels) == 0:
        raise EmptyDataset("no training samples")


def train_head(
    task: str,
    data,
    config: TrainConfig = TrainConfig(),
    kg: tuple[EmbeddingTable, NumericKG] | None = None,
) -> tuple[ModelParams, list[float]]:
    """Train encoder plus task head; returns parameters and per-epoch mean loss."""
    _check_data(task, data)
    model_opts = dict(config.model)
    if task == "mpp":
        if data.extra is not None:
            model_opts["extra"] = data.extra.shape[1]
        if kg is not None:
            model_opts["kg_dim"] = kg[0].dim
    params = init_model(task, config.seed, **model_opts)
    if task == "mpp" or (task == "dta" and params.config["mode"] == "regression"):
        # a zero spread leaves the head output exactly at the mean
        labels = np.asarray(data.labels, dtype=float)
        params.config["label_shift"] = float(labels.mean())
        params.config["label_scale"] = float(labels.std())
    prep = _Prepared(task, data, params, kg)
    opt = Adam(params, lr=config.lr)
    order_rng = np.random.default_rng([config.seed, 1])
    trace = []
    n = len(prep)
    for _ in range(config.epochs):
        perm = order_rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            params.zero_grad()
            loss = prep.loss(params, idx)
            loss.backward()
            opt.step()
            total += float(loss.value) * len(idx)
        trace.append(total / n)
    params.trained = config.epochs > 0
    return params, trace


def predict(params: ModelParams, data) -> np.ndarray:
    """Raw head outputs (logits for classification tasks), one per sample."""
    task = params.config["task"]
    if isinstance(data, list):
        data = MppData(data, np.zeros(len(data)))
    prep = _Prepared(task, data, params)
    out = []
    for start in range(0, len(prep), PREDICT_CHUNK):
        idx = np.arange(start, min(start + PREDICT_CHUNK, len(prep)))
        out.append(prep.outputs(params, idx)[0].value)
    return np.concatenate(out) if out else np.zeros(0)


def screen_library(
    library: list[Molecule], protein: str, params: ModelParams, top_n: int
) -> list[tuple[str, float]]:
    """Score every ligand against ``protein``; best first, ties in input order."""
    if params.config.get("task") != "dta" or not params.trained:
        raise UntrainedModel("screening needs a trained dta model")
    protein = check_sequence(protein)
    if not library:
        return []
    # score each distinct structure once so duplicates tie exactly
    keys = [write_smiles(m) for m in library]
    unique = list(dict.fromkeys(keys))
    first = {k: library[keys.index(k)] for k in unique}
    values = predict(params, DtaData([first[k] for k in unique], [protein] * len(unique), np.zeros(len(unique))))
    by_key = dict(zip(unique, values))
    scores = np.array([by_key[k] for k in keys])
    if params.config["mode"] == "classification":
        scores = 0.5 * (1.0 + np.tanh(0.5 * scores))
    order = sorted(range(len(library)), key=lambda k: -scores[k])
    return [(library[k].name or f"mol{k + 1}", float(scores[k])) for k in order[:top_n]]
