"""Finite-difference check of the analytic gradients."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .autograd import Tensor, record_kinks
from .params import ModelParams

STEP = 1e-4
# Denominator floor so entries whose gradient is essentially zero are judged
# by absolute error instead of dividing rounding noise by a tiny number.
FLOOR = 1e-6


@dataclass
class GradCheckReport:
    max_rel_error: float
    checked: int
    skipped: int
    worst: str


def _same(a: list, b: list) -> bool:
    return len(a) == len(b) and all(np.array_equal(x, y) for x, y in zip(a, b))


def _evaluate(loss_fn, params) -> tuple[float, list]:
    record_kinks(True)
    try:
        value = float(loss_fn(params).value)
    finally:
        pattern = record_kinks(False)
    return value, pattern


def grad_check(
    params: ModelParams,
    loss_fn: Callable[[ModelParams], Tensor],
    step: float = STEP,
    max_per_tensor: int | None = None,
    seed: int = 0,
    report: bool = False,
):
    """Max relative error between backprop gradients and central differences.

    Coordinates whose perturbation flips any rectifier or sign pattern are
    skipped: the loss is not differentiable across the kink.
    """
    params.zero_grad()
    record_kinks(True)
    try:
        loss = loss_fn(params)
    finally:
        base = record_kinks(False)
    loss.backward()
    rng = np.random.default_rng(seed)
    worst, worst_at, checked, skipped = 0.0, "", 0, 0
    for name, t in params.tensors.items():
        analytic = np.zeros_like(t.value) if t.grad is None else t.grad.copy()
        coords = np.arange(t.value.size)
        if max_per_tensor is not None and coords.size > max_per_tensor:
            coords = np.sort(rng.choice(coords, max_per_tensor, replace=False))
        flat = t.value.reshape(-1)
        for c in coords:
            keep = flat[c]
            flat[c] = keep + step
            up, p_up = _evaluate(loss_fn, params)
            flat[c] = keep - step
            down, p_down = _evaluate(loss_fn, params)
            flat[c] = keep
            if not (_same(p_up, base) and _same(p_down, base)):
                skipped += 1
                continue
            numeric = (up - down) / (2 * step)
            a = analytic.reshape(-1)[c]
            err = abs(a - numeric) / max(abs(a), abs(numeric), FLOOR)
            checked += 1
            if err > worst:
                worst, worst_at = err, f"{name}[{c}]"
    if report:
        return GradCheckReport(worst, checked, skipped, worst_at)
    return worst
