"""Seeded parameter initialization and named parameter sets.

All randomness flows through :func:`rng_for`, which derives independent,
reproducible numpy Generators from a base seed plus a string scope path.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from ..errors import ContractError
from .tensor import Tensor


def _scope_key(part: str) -> int:
    return int.from_bytes(hashlib.sha256(part.encode("utf-8")).digest()[:4], "little")


def rng_for(seed: int, *scope: str) -> np.random.Generator:
    """Generator for (seed, scope...) — stable across runs and platforms."""
    keys = tuple(_scope_key(s) for s in scope)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=keys))


def glorot_uniform(shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    if len(shape) == 2:
        fan_in, fan_out = shape
    elif len(shape) == 3:  # conv (k, Cin, Cout)
        fan_in, fan_out = shape[0] * shape[1], shape[2]
    else:
        raise ContractError(f"glorot init expects 2-D or 3-D shape, got {shape}")
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class ParamSet:
    """Ordered name -> Tensor mapping for a model's trainable state."""

    def __init__(self, seed: int):
        self.seed = seed
        self._params: dict[str, Tensor] = {}

    def matrix(self, name: str, shape: tuple[int, ...]) -> Tensor:
        t = Tensor(glorot_uniform(shape, rng_for(self.seed, "init", name)), requires_grad=True, name=name)
        return self._register(name, t)

    def zeros(self, name: str, shape: tuple[int, ...]) -> Tensor:
        return self._register(name, Tensor(np.zeros(shape), requires_grad=True, name=name))

    def ones(self, name: str, shape: tuple[int, ...]) -> Tensor:
        return self._register(name, Tensor(np.ones(shape), requires_grad=True, name=name))

    def _register(self, name: str, t: Tensor) -> Tensor:
        if name in self._params:
            raise ContractError(f"duplicate parameter name {name!r}")
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return list(self._params)

    def tensors(self) -> list[Tensor]:
        return list(self._params.values())

    def trainable(self) -> list[Tensor]:
        return [t for t in self._params.values() if t.requires_grad]

    def n_params(self) -> int:
        return sum(t.data.size for t in self._params.values())

    def zero_grads(self) -> None:
        for t in self._params.values():
            t.grad = None

    def freeze(self, prefix: str = "") -> None:
        for name, t in self._params.items():
            if name.startswith(prefix):
                t.requires_grad = False

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self._params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray], prefix: str = "") -> None:
        """Copy arrays into existing parameters (shapes must match)."""
        for name, arr in state.items():
            target = prefix + name
            if target not in self._params:
                raise ContractError(f"unknown parameter {target!r} in state dict")
            dst = self._params[target]
            if dst.data.shape != arr.shape:
                raise ContractError(
                    f"shape mismatch for {target!r}: {dst.data.shape} vs {arr.shape}"
                )
            dst.data[...] = arr
