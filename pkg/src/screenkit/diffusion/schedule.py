"""Variance-preserving noise schedule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BadStep(ValueError):
    pass


@dataclass(frozen=True)
class NoiseSchedule:
    """Per-step betas indexed 1..T; ``alpha_bar[0]`` is 1 (clean data).

    The reverse SDE uses drift f(x) = -beta_t x / 2 and diffusion g = sqrt(beta_t).
    ``strict=False`` admits the degenerate betas 0 and 1 used in sanity checks.
    """

    betas: np.ndarray
    strict: bool = True

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float).reshape(-1)
        if b.size == 0:
            raise ValueError("schedule needs at least one step")
        if self.strict:
            if not ((b > 0) & (b < 1)).all():
                raise ValueError("betas must lie strictly inside (0, 1)")
        elif not ((b >= 0) & (b <= 1)).all():
            raise ValueError("betas must lie in [0, 1]")
        b.setflags(write=False)
        object.__setattr__(self, "betas", b)

    @classmethod
    def linear(cls, T: int = 200, beta_1: float = 1e-4, beta_T: float = 0.02) -> NoiseSchedule:
        return cls(np.linspace(beta_1, beta_T, T))

    @property
    def T(self) -> int:
        return len(self.betas)

    @property
    def alpha_bar(self) -> np.ndarray:
        return np.concatenate([[1.0], np.cumprod(1.0 - self.betas)])

    def beta(self, t: int) -> float:
        self.check(t)
        return float(self.betas[t - 1])

    def check(self, t: int):
        if not 1 <= t <= self.T:
            raise BadStep(f"step {t} outside 1..{self.T}")

    def to_json(self) -> dict:
        return {"betas": self.betas.tolist(), "strict": self.strict}
