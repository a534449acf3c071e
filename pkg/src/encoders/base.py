"""
Encoder base class and parameter initialisers.
"""

from __future__ import annotations

import math
from typing import Dict, Iterator, Tuple

import numpy as np

from ndmath import Tensor, parameter


class Encoder:
    """
    编码器基类

    子类在 __init__ 中通过 _register 注册参数，参数名以 prefix 为前缀，
    parameters() 按注册顺序返回 {name: Tensor}。
    """

    prefix = ""

    def __init__(self):
        self._params: Dict[str, Tensor] = {}

    def _register(self, name: str, data: np.ndarray) -> Tensor:
        full_name = f"{self.prefix}.{name}" if self.prefix else name
        tensor = parameter(data, name=full_name)
        self._params[full_name] = tensor
        return tensor

    def parameters(self) -> Dict[str, Tensor]:
        return dict(self._params)

    def named_parameters(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self._params.items())

    def parameter_count(self) -> int:
        return int(sum(p.data.size for p in self._params.values()))


def uniform(rng: np.random.Generator, shape, bound: float) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape)


def linear_init(rng: np.random.Generator, fan_in: int, fan_out: int) -> Tuple[np.ndarray, np.ndarray]:
    """权重与偏置均为 U(-1/sqrt(fan_in), 1/sqrt(fan_in))"""
    bound = 1.0 / math.sqrt(fan_in)
    return uniform(rng, (fan_in, fan_out), bound), uniform(rng, fan_out, bound)


def conv_init(rng: np.random.Generator, out_channels: int, in_channels: int, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """He 正态初始化，适配 ReLU"""
    fan_in = in_channels * k * k
    std = math.sqrt(2.0 / fan_in)
    return rng.normal(0.0, std, size=(out_channels, in_channels, k, k)), np.zeros(out_channels)
