"""Euler-Maruyama reverse sampling, guidance, and replacement-method inpainting.

One reverse step from t to t-1 on either component x of the state:

    x <- x + (beta_t / 2) x + beta_t * s(x, t) + sqrt(beta_t) z

where s is the model score plus ``lam`` times the controller gradient, and z
is standard normal (symmetric with zero diagonal for A). The last step adds
no noise. Every operation is elementwise on A, so A stays exactly symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..nn.params import UntrainedModel
from .controller import Controller
from .schedule import NoiseSchedule
from .state import DiffusionState, noise_to, symmetric_noise


class MaskShapeMismatch(ValueError):
    pass


@dataclass
class SampleRun:
    states: list[DiffusionState]
    trajectory: list[tuple[np.ndarray, np.ndarray]] | None = None


def _width(model) -> int:
    return getattr(model, "width", None) or len(model.vocab) + 1


def _effective_score(model, controller: Controller | None, X, A, t, cond):
    sx, sa = model.score(X, A, t, cond)
    if controller is not None and controller.lam != 0:
        gx, ga = controller.gradient(X, A, t)
        sx = sx + controller.lam * gx
        sa = sa + controller.lam * ga
    return sx, sa


def _step(X, A, sx, sa, beta, rng, last):
    X = X + 0.5 * beta * X + beta * sx
    A = A + 0.5 * beta * A + beta * sa
    if not last:
        X = X + np.sqrt(beta) * rng.standard_normal(X.shape)
        A = A + np.sqrt(beta) * symmetric_noise(rng, A.shape)
    return X, A


def _run(model, schedule, n_nodes, n_samples, controller, seed, cond, keep, replace=None) -> SampleRun:
    if not getattr(model, "trained", False):
        raise UntrainedModel("sampling needs a trained score model")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    fixed = getattr(model, "n_nodes", n_nodes)
    if fixed != n_nodes:
        raise ValueError(f"model was trained on {fixed}-node states, asked for {n_nodes}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, n_nodes, _width(model)))
    A = symmetric_noise(rng, (n_samples, n_nodes, n_nodes))
    if replace is not None:
        X, A = replace(X, A, schedule.T)
    traj = [(X.copy(), A.copy())] if keep else None
    for t in range(schedule.T, 0, -1):
        sx, sa = _effective_score(model, controller, X, A, t, cond)
        X, A = _step(X, A, sx, sa, float(schedule.betas[t - 1]), rng, last=t == 1)
        if replace is not None:
            X, A = replace(X, A, t - 1)
        if keep:
            traj.append((X.copy(), A.copy()))
    states = [DiffusionState(X[k], A[k], 0) for k in range(n_samples)]
    return SampleRun(states, traj)


def reverse_sample(
    model,
    schedule: NoiseSchedule,
    n_nodes: int,
    controller: Controller | None = None,
    seed: int = 0,
    n_samples: int = 1,
    cond=None,
    keep_trajectory: bool = False,
) -> SampleRun:
    """Draw ``n_samples`` states from a Gaussian start by T reverse steps."""
    return _run(model, schedule, n_nodes, n_samples, controller, seed, cond, keep_trajectory)


def edge_mask_from_nodes(node_mask: np.ndarray) -> np.ndarray:
    """An entry of A is regenerated when either endpoint is."""
    m = np.asarray(node_mask, dtype=bool)
    return m[:, None] | m[None, :]


def inpaint_sample(
    model,
    schedule: NoiseSchedule,
    template: DiffusionState,
    node_mask: np.ndarray,
    edge_mask: np.ndarray | None = None,
    controller: Controller | None = None,
    seed: int = 0,
    n_samples: int = 1,
    cond=None,
) -> SampleRun:
    """Regenerate masked entries (True = regenerate); the rest track the template.

    After every step the unmasked entries are overwritten with the template
    noised to the new step, drawn from a stream separate from the sampler's
    (so a full mask reproduces :func:`reverse_sample` exactly). At step 0 the
    overwrite is the template itself.
    """
    n = template.X.shape[0]
    node_mask = np.asarray(node_mask, dtype=bool)
    if node_mask.shape != (n,):
        raise MaskShapeMismatch(f"node mask has shape {node_mask.shape}, template has {n} nodes")
    if edge_mask is None:
        edge_mask = edge_mask_from_nodes(node_mask)
    edge_mask = np.asarray(edge_mask, dtype=bool)
    if edge_mask.shape != (n, n):
        raise MaskShapeMismatch(f"edge mask has shape {edge_mask.shape}, expected ({n}, {n})")
    if not np.array_equal(edge_mask, edge_mask.T):
        raise MaskShapeMismatch("edge mask must be symmetric")
    keep_x = ~node_mask
    keep_a = ~edge_mask
    if not keep_x.any() and not keep_a.any():
        return reverse_sample(model, schedule, n, controller, seed, n_samples, cond)
    template_rng = np.random.default_rng([seed, 2])

    def replace(X, A, t):
        if t == 0:
            kx = np.broadcast_to(template.X, X.shape)
            ka = np.broadcast_to(template.A, A.shape)
        else:
            kx, ka = np.empty_like(X), np.empty_like(A)
            for b in range(X.shape[0]):
                kx[b], ka[b], _, _ = noise_to(template.X, template.A, t, schedule, template_rng)
        return np.where(keep_x[None, :, None], kx, X), np.where(keep_a[None], ka, A)

    return _run(model, schedule, n, n_samples, controller, seed, cond, False, replace)
