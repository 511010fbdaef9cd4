"""Regression controller on (possibly noisy) graph states, used for guidance.

The network sees X, A and the time features, pools node states by sum and
regresses a scalar. A enters through a (1/n-scaled) product with the node states, so the
gradient with respect to both X and A comes out of the same backward pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..chem.molecule import Molecule
from ..nn.autograd import Tensor, concat, matmul, mse, relu, scale, total
from ..nn.data import EmptyDataset
from ..nn.params import Adam, ModelParams, UntrainedModel
from .schedule import NoiseSchedule
from .score import TIME_FEATURES, _broadcast_nodes, time_features
from .state import VOCAB, DiffusionState, encode_molecule, noise_to


@dataclass
class ControllerConfig:
    seed: int = 0
    epochs: int = 300
    lr: float = 3e-3
    batch_size: int = 32
    hidden: int = 32
    lam: float = 1.0


class Controller:
    def __init__(self, params: ModelParams, schedule: NoiseSchedule, lam: float = 1.0):
        if lam < 0:
            raise ValueError("guidance scale must be >= 0")
        self.params = params
        self.schedule = schedule
        self.lam = lam

    @classmethod
    def create(cls, schedule: NoiseSchedule, n_nodes: int, vocab=VOCAB, hidden: int = 32, seed: int = 0,
               lam: float = 1.0) -> Controller:
        d = len(vocab) + 1
        cfg = {"kind": "controller", "n_nodes": n_nodes, "vocab": list(vocab), "hidden": hidden, "seed": seed,
               "betas": schedule.betas.tolist()}
        rng = np.random.default_rng(seed)
        p = ModelParams(cfg)
        p.add_dense("ctl.in", d + TIME_FEATURES, hidden, rng)
        p.add_dense("ctl.mix", 2 * hidden, hidden, rng)
        p.add_dense("ctl.hidden", hidden, hidden, rng)
        p.add_dense("ctl.out", hidden, 1, rng)
        return cls(p, schedule, lam)

    @classmethod
    def from_params(cls, params: ModelParams, lam: float = 1.0) -> Controller:
        if params.config.get("kind") != "controller":
            raise ValueError("checkpoint does not hold a controller")
        return cls(params, NoiseSchedule(np.array(params.config["betas"])), lam)

    @property
    def vocab(self) -> tuple[str, ...]:
        return tuple(self.params.config["vocab"])

    @property
    def n_nodes(self) -> int:
        return self.params.config["n_nodes"]

    def forward(self, X: Tensor, A: Tensor, t: np.ndarray) -> Tensor:
        p = self.params
        B, n, _ = X.shape
        tf = Tensor(_broadcast_nodes(time_features(self.schedule, t), n))
        h = relu(p.dense("ctl.in", concat([X, tf])))
        h = relu(p.dense("ctl.mix", concat([h, scale(matmul(A, h), 1.0 / n)])))
        pooled = total(h, axis=1)
        out = p.dense("ctl.out", relu(p.dense("ctl.hidden", pooled)))
        return Tensor(out.value[:, 0], parents=(out,), backward=lambda g: (g[:, None],))

    def value(self, X: np.ndarray, A: np.ndarray, t) -> np.ndarray:
        t = np.broadcast_to(np.asarray(t), (X.shape[0],))
        return self.forward(Tensor(X), Tensor(A), t).value

    def gradient(self, X: np.ndarray, A: np.ndarray, t: int) -> tuple[np.ndarray, np.ndarray]:
        """d(sum of controller values)/d(X, A); the A part is symmetrized with a zero diagonal."""
        if not self.params.trained:
            raise UntrainedModel("controller has not been trained")
        xt, at = Tensor(X, requires_grad=True), Tensor(A, requires_grad=True)
        out = total(self.forward(xt, at, np.full(X.shape[0], t)))
        out.backward()
        ga = at.grad
        ga = 0.5 * (ga + np.swapaxes(ga, -1, -2))
        n = A.shape[-1]
        ga[..., np.arange(n), np.arange(n)] = 0.0
        self.params.zero_grad()
        return xt.grad, ga

    def score_molecules(self, mols: list[Molecule]) -> np.ndarray:
        """Controller value of each molecule's clean state (t = 0)."""
        states = [encode_molecule(m, self.n_nodes, self.vocab) for m in mols]
        X = np.stack([s.X for s in states])
        A = np.stack([s.A for s in states])
        return self.value(X, A, 0)

    __call__ = score_molecules


def train_controller(
    dataset: list[DiffusionState], labels, schedule: NoiseSchedule, config: ControllerConfig = ControllerConfig(),
    vocab=VOCAB,
) -> tuple[Controller, list[float]]:
    """MSE regression on states noised to a uniform step in 0..T (0 keeps the clean state)."""
    labels = np.asarray(labels, dtype=float)
    if not dataset:
        raise EmptyDataset("no training graphs")
    if len(labels) != len(dataset):
        raise ValueError("one label per state is required")
    n = dataset[0].X.shape[0]
    ctl = Controller.create(schedule, n, vocab, config.hidden, config.seed, config.lam)
    X0 = np.stack([s.X for s in dataset])
    A0 = np.stack([s.A for s in dataset])
    rng = np.random.default_rng([config.seed, 1])
    opt = Adam(ctl.params, lr=config.lr)
    trace = []
    for _ in range(config.epochs):
        perm = rng.permutation(len(dataset))
        running = 0.0
        for start in range(0, len(perm), config.batch_size):
            idx = perm[start : start + config.batch_size]
            t = rng.integers(0, schedule.T + 1, size=len(idx))
            Xt, At = X0[idx].copy(), A0[idx].copy()
            for k, b in enumerate(idx):
                if t[k] > 0:
                    Xt[k], At[k], _, _ = noise_to(X0[b], A0[b], int(t[k]), schedule, rng)
            ctl.params.zero_grad()
            loss = mse(ctl.forward(Tensor(Xt), Tensor(At), t), labels[idx])
            loss.backward()
            opt.step()
            running += float(loss.value) * len(idx)
        trace.append(running / len(dataset))
    ctl.params.trained = config.epochs > 0
    return ctl, trace
