"""
Adam Optimizer and Learning-rate Schedule
=========================================

- adam_step: 带偏差修正的 Adam 单步更新 (纯函数，返回新参数和新状态)
- Adam: 原地更新模型参数的有状态封装
- lr_schedule: 线性预热 + 余弦退火到 0
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from core.errors import DimensionError, DomainError
from ndmath import Tensor


@dataclass
class AdamState:
    """一阶矩 m、二阶矩 v 与已执行步数"""
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)
    step: int = 0

    @classmethod
    def fresh(cls, params: Sequence[np.ndarray]) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params], step=0)

    def copy(self) -> "AdamState":
        return AdamState([m.copy() for m in self.m], [v.copy() for v in self.v], self.step)


def adam_step(params: Sequence[np.ndarray], grads: Sequence[np.ndarray], state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8
              ) -> Tuple[List[np.ndarray], AdamState]:
    """
    Adam 更新

        m ← β1·m + (1-β1)·g
        v ← β2·v + (1-β2)·g²
        θ ← θ - lr · m̂ / (√v̂ + ε),  m̂ = m/(1-β1^t), v̂ = v/(1-β2^t)

    Examples:
        θ=0, g=1, lr=0.1, 初始状态 → θ = -0.1/(1+1e-8)

    Raises:
        DimensionError: 参数、梯度、状态的数量或形状不一致
        DomainError: lr < 0
    """
    if lr < 0:
        raise DomainError(f"learning rate must be non-negative, got {lr}")
    if not state.m:
        state = AdamState.fresh(params)
    if not (len(params) == len(grads) == len(state.m) == len(state.v)):
        raise DimensionError(
            f"adam_step got {len(params)} params, {len(grads)} grads, {len(state.m)} moments"
        )

    t = state.step + 1
    correction1 = 1.0 - beta1 ** t
    correction2 = 1.0 - beta2 ** t
    new_params, new_m, new_v = [], [], []
    for index, (theta, g, m, v) in enumerate(zip(params, grads, state.m, state.v)):
        theta = np.asarray(theta, dtype=np.float64)
        g = np.asarray(g, dtype=np.float64)
        if theta.shape != g.shape or theta.shape != m.shape:
            raise DimensionError(f"shape mismatch at parameter {index}: {theta.shape} vs {g.shape} vs {m.shape}")
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        new_params.append(theta - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(new_m, new_v, t)


class Adam:
    """对一组 Tensor 参数原地执行 Adam 更新"""

    def __init__(self, params: Sequence[Tensor], beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.state = AdamState.fresh([p.data for p in self.params])

    def step(self, grads: Sequence[np.ndarray], lr: float) -> None:
        updated, self.state = adam_step(
            [p.data for p in self.params], grads, self.state, lr, self.beta1, self.beta2, self.eps
        )
        for tensor, value in zip(self.params, updated):
            tensor.data[...] = value


def lr_schedule(step: int, total_steps: int, warmup_steps: int, max_lr: float) -> float:
    """
    预热 + 余弦退火

    step < warmup_steps: max_lr·(step+1)/warmup_steps
    否则: max_lr·0.5·(1 + cos(π·(step-warmup)/(total-warmup)))

    Raises:
        DomainError: step 不在 [0, total_steps]、warmup_steps >= total_steps 或 max_lr < 0
    """
    if total_steps < 1 or not 0 <= step <= total_steps:
        raise DomainError(f"step {step} outside [0, {total_steps}]")
    if not 0 <= warmup_steps < total_steps:
        raise DomainError(f"warmup_steps must lie in [0, {total_steps}), got {warmup_steps}")
    if max_lr < 0:
        raise DomainError(f"max_lr must be non-negative, got {max_lr}")
    if step < warmup_steps:
        return max_lr * (step + 1) / warmup_steps
    progress = (step - warmup_steps) / (total_steps - warmup_steps)
    return max_lr * 0.5 * (1.0 + math.cos(math.pi * progress))
