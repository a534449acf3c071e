"""
Finite-difference verification of analytic gradients.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence, Union

import numpy as np

from core.errors import DomainError, NumericError
from ndmath.tensor import Tensor, backward


Objective = Callable[[Sequence[Tensor]], Union[Tensor, float]]


def _evaluate(f: Objective, params: Sequence[Tensor]) -> float:
    out = f(params)
    value = out.item() if isinstance(out, Tensor) else float(out)
    if not math.isfinite(value):
        raise NumericError(f"objective evaluated to a non-finite value: {value}")
    return value


def grad_check(f: Objective, params: Sequence[Tensor], eps: float = 1e-4) -> float:
    """
    比较解析梯度与中心差分

    Args:
        f: 以参数列表为输入、返回标量张量的目标函数
        params: 需要校验的叶子参数
        eps: 差分步长, 取值范围 (0, 1e-2]

    Returns:
        所有坐标上 |analytic - numeric| / max(1, |analytic|) 的最大值

    Raises:
        DomainError: eps 超出范围
        NumericError: 目标函数在扰动点上不是有限值
    """
    if not (0.0 < eps <= 1e-2):
        raise DomainError(f"eps must lie in (0, 1e-2], got {eps}")

    loss = f(params)
    if not isinstance(loss, Tensor):
        loss = Tensor(loss)
    if not math.isfinite(loss.item()):
        raise NumericError("objective evaluated to a non-finite value")
    analytic = [g.copy() for g in backward(loss, params)]

    worst = 0.0
    for param, grad in zip(params, analytic):
        flat = param.data.reshape(-1)
        grad_flat = grad.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + eps
            plus = _evaluate(f, params)
            flat[i] = original - eps
            minus = _evaluate(f, params)
            flat[i] = original
            numeric = (plus - minus) / (2.0 * eps)
            error = abs(grad_flat[i] - numeric) / max(1.0, abs(grad_flat[i]))
            worst = max(worst, float(error))
    return worst


def random_point(shape, rng: np.random.Generator, name: str = "") -> Tensor:
    """生成标准正态随机点上的叶子参数，供梯度校验使用"""
    return Tensor(rng.standard_normal(shape), requires_grad=True, name=name)
