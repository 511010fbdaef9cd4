"""Named parameter store, dense layers, Adam, and the checkpoint format.

Checkpoint layout (little-endian)::

    magic    4 bytes  b"SKMP"
    version  u32      1
    meta     u32 length + UTF-8 JSON   (toolkit version, spec hash, seed)
    config   u32 length + UTF-8 JSON   (sorted keys)
    count    u32      number of tensors
    per tensor: u16 name length, UTF-8 name, u8 ndim, u32 dims..., float32 data (C order)
"""

from __future__ import annotations

import json
import math
import struct
from pathlib import Path

import numpy as np

from .autograd import Tensor, add, matmul

CHECKPOINT_MAGIC = b"SKMP"


class ShapeMismatch(ValueError):
    pass


class UntrainedModel(RuntimeError):
    pass


class ModelParams:
    """Ordered named tensors plus the configuration that shaped them."""

    def __init__(self, config: dict, tensors: dict[str, np.ndarray] | None = None, trained: bool = False):
        self.config = dict(config)
        self.tensors: dict[str, Tensor] = {}
        self.trained = trained
        for name, value in (tensors or {}).items():
            self.tensors[name] = Tensor(np.array(value, dtype=float), requires_grad=True)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def add_dense(self, name: str, fan_in: int, fan_out: int, rng: np.random.Generator):
        """Weights uniform in +-sqrt(6 / fan_in) (variance-preserving under relu), zero bias."""
        bound = math.sqrt(6.0 / fan_in)
        self.tensors[f"{name}.w"] = Tensor(rng.uniform(-bound, bound, size=(fan_in, fan_out)), requires_grad=True)
        self.tensors[f"{name}.b"] = Tensor(np.zeros(fan_out), requires_grad=True)

    def add_array(self, name: str, value: np.ndarray):
        self.tensors[name] = Tensor(np.array(value, dtype=float), requires_grad=True)

    def dense(self, name: str, x: Tensor) -> Tensor:
        w, b = self.tensors[f"{name}.w"], self.tensors[f"{name}.b"]
        if x.shape[-1] != w.shape[0]:
            raise ShapeMismatch(f"layer {name} expects {w.shape[0]} inputs, got {x.shape[-1]}")
        return add(matmul(x, w), b)

    def names(self) -> list[str]:
        return list(self.tensors)

    def arrays(self) -> dict[str, np.ndarray]:
        return {k: t.value for k, t in self.tensors.items()}

    def zero_grad(self):
        for t in self.tensors.values():
            t.grad = None

    def copy(self) -> ModelParams:
        return ModelParams(self.config, {k: v.copy() for k, v in self.arrays().items()}, self.trained)

    def to_bytes(self, meta: dict | None = None) -> bytes:
        out = [CHECKPOINT_MAGIC, struct.pack("<I", 1)]
        for doc in (meta or {}, {**self.config, "trained": self.trained}):
            raw = json.dumps(doc, sort_keys=True).encode()
            out += [struct.pack("<I", len(raw)), raw]
        out.append(struct.pack("<I", len(self.tensors)))
        for name, t in self.tensors.items():
            raw = name.encode()
            out += [struct.pack("<H", len(raw)), raw, struct.pack("<B", t.value.ndim)]
            out.append(struct.pack(f"<{t.value.ndim}I", *t.value.shape))
            out.append(np.ascontiguousarray(t.value, dtype="<f4").tobytes())
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> tuple[ModelParams, dict]:
        if data[:4] != CHECKPOINT_MAGIC:
            raise ValueError("not a model checkpoint")
        (version,) = struct.unpack_from("<I", data, 4)
        if version != 1:
            raise ValueError(f"unsupported checkpoint version {version}")
        off = 8
        docs = []
        for _ in range(2):
            (n,) = struct.unpack_from("<I", data, off)
            docs.append(json.loads(data[off + 4 : off + 4 + n]))
            off += 4 + n
        meta, config = docs
        trained = config.pop("trained", False)
        (count,) = struct.unpack_from("<I", data, off)
        off += 4
        tensors = {}
        for _ in range(count):
            (n,) = struct.unpack_from("<H", data, off)
            name = data[off + 2 : off + 2 + n].decode()
            off += 2 + n
            (ndim,) = struct.unpack_from("<B", data, off)
            shape = struct.unpack_from(f"<{ndim}I", data, off + 1)
            off += 1 + 4 * ndim
            size = int(np.prod(shape, dtype=np.int64))
            tensors[name] = np.frombuffer(data, dtype="<f4", count=size, offset=off).astype(float).reshape(shape)
            off += 4 * size
        return cls(config, tensors, trained), meta

    def save(self, path, meta: dict | None = None):
        Path(path).write_bytes(self.to_bytes(meta))

    @classmethod
    def load(cls, path) -> tuple[ModelParams, dict]:
        return cls.from_bytes(Path(path).read_bytes())


class Adam:
    def __init__(self, params: ModelParams, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params, self.lr, self.b1, self.b2, self.eps = params, lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(t.value) for k, t in params.tensors.items()}
        self.v = {k: np.zeros_like(t.value) for k, t in params.tensors.items()}
        self.t = 0

    def step(self):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for k, t in self.params.tensors.items():
            if t.grad is None:
                continue
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * t.grad
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * t.grad**2
            t.value = t.value - self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)
