"""Decoupled-weight-decay gradient descent with a warmup + cosine schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .tensor import Tensor


@dataclass
class WarmupCosine:
    """Linear warmup to ``peak_lr`` then cosine annealing to ``min_lr``.

    Step s (0-indexed): s < warmup -> peak*(s+1)/warmup; afterwards the
    cosine half-period runs from peak at s=warmup to min_lr at s=total-1
    and stays at min_lr beyond.
    """

    peak_lr: float
    warmup_steps: int
    total_steps: int
    min_lr: float = 0.0
    step: int = 0

    def lr_at(self, step: int) -> float:
        if self.warmup_steps > 0 and step < self.warmup_steps:
            return self.peak_lr * (step + 1) / self.warmup_steps
        span = max(1, self.total_steps - self.warmup_steps)
        progress = min(1.0, (step - self.warmup_steps) / span)
        return self.min_lr + 0.5 * (self.peak_lr - self.min_lr) * (1.0 + math.cos(math.pi * progress))

    def current_lr(self) -> float:
        return self.lr_at(self.step)

    def advance(self) -> None:
        self.step += 1


def zero_grads(params: list[Tensor]) -> None:
    for p in params:
        p.grad = None


def grad_norm(params: list[Tensor]) -> float:
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float(np.sum(p.grad * p.grad))
    return math.sqrt(total)


def clip_grad_norm(params: list[Tensor], max_norm: float) -> float:
    """Scale all grads so their global L2 norm is at most ``max_norm``."""
    norm = grad_norm(params)
    if norm > max_norm > 0.0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return norm


def sgd_step(
    params: list[Tensor],
    lr: float | None = None,
    schedule: WarmupCosine | None = None,
    weight_decay: float = 0.0,
) -> float:
    """In-place descent step; returns the effective learning rate used.

    The effective rate comes from ``schedule`` when given (which then
    advances by one step), else from ``lr``.  Weight decay is decoupled:
    p <- (1 - lr*decay) * p - lr * grad.
    """
    if schedule is not None:
        eff = schedule.current_lr()
    elif lr is not None:
        eff = lr
    else:
        raise ContractError("sgd_step needs lr or schedule")
    for p in params:
        if not p.requires_grad:
            continue
        if p.grad is None:
            raise ContractError(f"missing gradient for parameter {p.name!r}")
        if weight_decay != 0.0:
            p.data *= 1.0 - eff * weight_decay
        p.data -= eff * p.grad
    if schedule is not None:
        schedule.advance()
    return eff
