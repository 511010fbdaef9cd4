"""Noise-prediction network over dense graph states and its training loop.

The prediction is a factorized baseline plus a learned correction. The
baseline is the exact noise posterior mean when every node row is an
independent one-hot draw and every pair an independent bond-order draw, with
per-position frequencies fitted to the training set. It is exact once the
nearest clean value is unambiguous (small t), so the network only has to model
the dependencies between entries. Its correction is scaled by sqrt(1 - abar_t)
and starts at zero.

Node states start from [X, baseline noise and posterior of X, expected valence
and degree, position one-hot, time, condition] and go through rounds of
``h <- relu(W [h, P h] + b) + h``, where P holds posterior bond probabilities / 4.
The A correction is read from each unordered pair via (h_i + h_j, h_i * h_j,
pair statistics, time), so it is symmetric by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn.autograd import Tensor, add, concat, matmul, mse, mul, relu, scale, take
from ..nn.data import EmptyDataset
from ..nn.params import Adam, ModelParams, UntrainedModel
from .schedule import NoiseSchedule
from .state import VOCAB, DiffusionState, noise_to

TIME_FEATURES = 5


def time_features(schedule: NoiseSchedule, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t)
    ab = schedule.alpha_bar[t]
    s = t / schedule.T
    return np.stack([np.sqrt(ab), np.sqrt(1 - ab), s, np.sin(np.pi * s), np.cos(np.pi * s)], axis=-1)


def prior_posterior(x, alpha_bar, points, log_prior):
    """Posterior over clean candidates for x_t = sqrt(abar) x0 + sqrt(1 - abar) eps.

    ``points`` (K, m) lists the candidates for the trailing dim m of ``x``;
    returns the weights (..., K) and the implied noise mean (same shape as x).
    """
    root = np.sqrt(alpha_bar)[..., None]
    var = np.maximum(1.0 - np.asarray(alpha_bar), 1e-12)[..., None]
    d2 = ((x[..., None, :] - root[..., None] * points) ** 2).sum(-1)
    logw = log_prior - d2 / (2.0 * var)
    logw -= logw.max(axis=-1, keepdims=True)
    w = np.exp(logw)
    w /= w.sum(-1, keepdims=True)
    return w, (x - root * (w @ points)) / np.sqrt(var)


def bond_prior_noise(a: np.ndarray, alpha_bar, prior) -> tuple[np.ndarray, np.ndarray]:
    """Posterior when every pair is an independent draw of bond order k with
    probability prior[k]. Returns (weights over orders, noise mean); exact at
    small t, shrinks to the prior at large t."""
    levels = np.arange(np.shape(prior)[-1], dtype=float)[:, None]
    w, eps = prior_posterior(a[..., None], alpha_bar, levels, np.log(np.maximum(prior, 1e-12)))
    return w, eps[..., 0]


def row_prior_noise(X: np.ndarray, alpha_bar, prior) -> tuple[np.ndarray, np.ndarray]:
    """Same for node rows, each an independent one-hot draw with column probabilities ``prior``."""
    prior = np.asarray(prior)
    return prior_posterior(X, alpha_bar, np.eye(prior.shape[-1]), np.log(np.maximum(prior, 1e-12)))


def fitted_priors(X0: np.ndarray, A0: np.ndarray, levels: int = 4, smoothing: float = 0.5):
    """Per-position column frequencies of the one-hot rows, shape (n, d), and
    per-pair bond-order frequencies, shape (P, levels), with additive smoothing.

    States keep the atom order they were encoded in (SMILES order, padding
    last), so position carries real signal: most bonds join neighbouring indices.
    """
    n = A0.shape[-1]
    iu, ju = np.triu_indices(n, 1)
    rows = X0.sum(axis=0) + smoothing
    orders = np.clip(np.rint(A0[:, iu, ju]).astype(int), 0, levels - 1)
    bonds = (orders[..., None] == np.arange(levels)).sum(axis=0) + smoothing
    return rows / rows.sum(-1, keepdims=True), bonds / bonds.sum(-1, keepdims=True)


def _broadcast_nodes(feat: np.ndarray, n: int) -> np.ndarray:
    return np.repeat(feat[:, None, :], n, axis=1)


@dataclass
class ScoreConfig:
    seed: int = 0
    epochs: int = 200
    lr: float = 2e-3
    batch_size: int = 32
    hidden: int = 64
    layers: int = 3
    ema: float = 0.99


class ScoreModel:
    def __init__(self, params: ModelParams, schedule: NoiseSchedule):
        self.params = params
        self.schedule = schedule

    @classmethod
    def create(cls, schedule: NoiseSchedule, n_nodes: int, vocab=VOCAB, hidden: int = 64, layers: int = 3,
               cond_dim: int = 0, seed: int = 0, row_prior=None, bond_prior=None) -> ScoreModel:
        """``row_prior`` / ``bond_prior`` set the factorized baseline the network corrects; uniform if omitted."""
        d = len(vocab) + 1
        n_pairs = n_nodes * (n_nodes - 1) // 2
        row_prior = np.full((n_nodes, d), 1.0 / d) if row_prior is None else np.asarray(row_prior, dtype=float)
        bond_prior = np.full((n_pairs, 4), 0.25) if bond_prior is None else np.asarray(bond_prior, dtype=float)
        if row_prior.shape != (n_nodes, d) or bond_prior.shape != (n_pairs, 4):
            raise ValueError(f"row_prior must be ({n_nodes}, {d}) and bond_prior ({n_pairs}, 4)")
        cfg = {"kind": "score", "n_nodes": n_nodes, "vocab": list(vocab), "hidden": hidden, "layers": layers,
               "cond_dim": cond_dim, "seed": seed, "betas": schedule.betas.tolist(),
               "row_prior": row_prior.tolist(), "bond_prior": bond_prior.tolist()}
        rng = np.random.default_rng(seed)
        p = ModelParams(cfg)
        p.add_dense("score.in", 3 * d + 2 + n_nodes + TIME_FEATURES + cond_dim, hidden, rng)
        for l in range(layers):
            p.add_dense(f"score.{l}", 2 * hidden, hidden, rng)
        p.add_dense("score.x_out", hidden, d, rng)
        p.add_dense("score.pair_hidden", 2 * hidden + 5 + TIME_FEATURES, hidden, rng)
        p.add_dense("score.pair_out", hidden, 1, rng)
        # the network is a correction on top of the prior baseline, so it starts at zero
        for name in ("score.x_out", "score.pair_out"):
            p[f"{name}.w"].value[...] = 0.0
        return cls(p, schedule)

    @classmethod
    def from_params(cls, params: ModelParams) -> ScoreModel:
        if params.config.get("kind") != "score":
            raise ValueError("checkpoint does not hold a score model")
        return cls(params, NoiseSchedule(np.array(params.config["betas"])))

    @property
    def vocab(self) -> tuple[str, ...]:
        return tuple(self.params.config["vocab"])

    @property
    def n_nodes(self) -> int:
        return self.params.config["n_nodes"]

    @property
    def trained(self) -> bool:
        return self.params.trained

    def _cond(self, cond, batch: int) -> np.ndarray:
        c = self.params.config["cond_dim"]
        if c == 0:
            return np.zeros((batch, 0))
        if cond is None:
            raise ValueError(f"model expects a {c}-dim condition vector")
        cond = np.asarray(cond, dtype=float)
        return np.broadcast_to(cond, (batch, c)) if cond.ndim == 1 else cond

    def forward(self, X: np.ndarray, A: np.ndarray, t: np.ndarray, cond=None) -> tuple[Tensor, Tensor]:
        """Predicted noise for X (B, n, d) and for the upper-triangle pairs of A (B, P)."""
        p = self.params
        B, n, _ = X.shape
        tf = time_features(self.schedule, t)
        ab = self.schedule.alpha_bar[np.asarray(t)]
        sd = np.sqrt(1.0 - ab)
        iu, ju = np.triu_indices(n, 1)
        a = A[:, iu, ju]
        wx, base_x = row_prior_noise(X, ab[:, None], np.asarray(p.config["row_prior"]))
        wa, base_a = bond_prior_noise(a, ab[:, None], np.asarray(p.config["bond_prior"]))
        order = wa @ np.arange(wa.shape[-1], dtype=float)
        bond_p = 1.0 - wa[..., 0]
        order_m = np.zeros((B, n, n))
        order_m[:, iu, ju] = order_m[:, ju, iu] = order
        bond_m = np.zeros((B, n, n))
        bond_m[:, iu, ju] = bond_m[:, ju, iu] = bond_p
        # expected valence and degree under the factorized posterior, both on a 0..~1 scale
        node_stats = np.stack([order_m.sum(-1) / 4.0, bond_m.sum(-1) / 4.0], axis=-1)
        feats = np.concatenate(
            [X, base_x, wx, node_stats, np.broadcast_to(np.eye(n), (B, n, n)), _broadcast_nodes(tf, n),
             _broadcast_nodes(self._cond(cond, B), n)],
            axis=-1,
        )
        h = relu(p.dense("score.in", Tensor(feats)))
        prop = Tensor(bond_m / 4.0)
        for l in range(p.config["layers"]):
            h = add(relu(p.dense(f"score.{l}", concat([h, matmul(prop, h)]))), h)
        eps_x = add(mul(p.dense("score.x_out", h), Tensor(sd[:, None, None])), Tensor(base_x))
        hi, hj = take(h, iu, axis=1), take(h, ju, axis=1)
        two_hop = (bond_m @ bond_m)[:, iu, ju] / 4.0
        pair_feats = np.stack([a, base_a, order, bond_p, two_hop], axis=-1)
        pair_in = concat([add(hi, hj), mul(hi, hj), Tensor(pair_feats), Tensor(_broadcast_nodes(tf, len(iu)))])
        out = p.dense("score.pair_out", relu(p.dense("score.pair_hidden", pair_in)))
        eps_a = Tensor(out.value[..., 0] * sd[:, None] + base_a, parents=(out,),
                       backward=lambda g: ((g * sd[:, None])[..., None],))
        return eps_x, eps_a

    def predict_noise(self, X, A, t, cond=None) -> tuple[np.ndarray, np.ndarray]:
        eps_x, pairs = self.forward(X, A, t, cond)
        n = X.shape[1]
        iu, ju = np.triu_indices(n, 1)
        eps_a = np.zeros(A.shape)
        eps_a[:, iu, ju] = pairs.value
        eps_a[:, ju, iu] = pairs.value
        return eps_x.value, eps_a

    def score(self, X, A, t: int, cond=None) -> tuple[np.ndarray, np.ndarray]:
        """Estimated grad log p_t = -eps_hat / sqrt(1 - abar_t)."""
        if not self.trained:
            raise UntrainedModel("score model has not been trained")
        steps = np.full(X.shape[0], t)
        ex, ea = self.predict_noise(X, A, steps, cond)
        sd = np.sqrt(1 - self.schedule.alpha_bar[t])
        return -ex / sd, -ea / sd


class AnalyticGaussianScore:
    """Exact score of the standard normal law at every step: -x."""

    trained = True

    def __init__(self, schedule: NoiseSchedule, n_nodes: int, width: int):
        self.schedule = schedule
        self.n_nodes = n_nodes
        self.width = width

    def score(self, X, A, t: int, cond=None):
        return -X, -A


def denoising_loss(model: ScoreModel, X0: np.ndarray, A0: np.ndarray, rng: np.random.Generator, cond=None) -> Tensor:
    B = X0.shape[0]
    t = rng.integers(1, model.schedule.T + 1, size=B)
    Xt, At, ex, ea = np.empty_like(X0), np.empty_like(A0), np.empty_like(X0), np.empty_like(A0)
    for b in range(B):
        Xt[b], At[b], ex[b], ea[b] = noise_to(X0[b], A0[b], int(t[b]), model.schedule, rng)
    pred_x, pred_a = model.forward(Xt, At, t, cond)
    iu, ju = np.triu_indices(X0.shape[1], 1)
    return scale(add(mse(pred_x, ex), mse(pred_a, ea[:, iu, ju])), 0.5)


def train_score(
    dataset: list[DiffusionState],
    schedule: NoiseSchedule,
    config: ScoreConfig = ScoreConfig(),
    conditions: np.ndarray | None = None,
    vocab=VOCAB,
) -> tuple[ScoreModel, list[float]]:
    """Denoising score matching with uniform t; returns the model and per-epoch mean batch loss.

    Adam with a cosine learning-rate decay; the returned weights are an
    exponential moving average (``config.ema``) of the iterates.
    """
    if not dataset:
        raise EmptyDataset("no training graphs")
    n = dataset[0].X.shape[0]
    if any(s.X.shape != dataset[0].X.shape for s in dataset):
        raise ValueError("all training states must be padded to the same size")
    cond_dim = 0 if conditions is None else np.asarray(conditions).shape[1]
    X0 = np.stack([s.X for s in dataset])
    A0 = np.stack([s.A for s in dataset])
    row_prior, bond_prior = fitted_priors(X0, A0)
    model = ScoreModel.create(schedule, n, vocab, config.hidden, config.layers, cond_dim, config.seed,
                              row_prior, bond_prior)
    rng = np.random.default_rng([config.seed, 1])
    opt = Adam(model.params, lr=config.lr)
    shadow = {k: v.copy() for k, v in model.params.arrays().items()}
    trace = []
    for epoch in range(config.epochs):
        opt.lr = 0.5 * config.lr * (1.0 + np.cos(np.pi * epoch / config.epochs))
        perm = rng.permutation(len(dataset))
        total, steps = 0.0, 0
        for start in range(0, len(perm), config.batch_size):
            idx = perm[start : start + config.batch_size]
            if len(idx) < config.batch_size:
                # a batch element is a (graph, t, noise) draw, so short batches are topped up with repeats
                idx = np.concatenate([idx, rng.integers(0, len(dataset), config.batch_size - len(idx))])
            model.params.zero_grad()
            loss = denoising_loss(model, X0[idx], A0[idx], rng, None if conditions is None else conditions[idx])
            loss.backward()
            opt.step()
            for k, v in model.params.arrays().items():
                shadow[k] += (1.0 - config.ema) * (v - shadow[k])
            total += float(loss.value)
            steps += 1
        trace.append(total / steps)
    if config.epochs > 0 and config.ema > 0:
        for k, v in model.params.arrays().items():
            v[...] = shadow[k]
    model.params.trained = config.epochs > 0
    return model, trace
