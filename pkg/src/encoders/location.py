"""
Location Encoder
================

球谐函数 (SH) 位置编码 + SIREN：

- sh_encode: 实值、正交归一的球谐基 Y_l^m(θ, φ)，l = 0..L, m = -l..l，按 (l, m) 字典序排列；
  θ 为余纬 (90° - lat)，φ 为经度
- LocationEncoder: SH 特征 → 正弦激活的 MLP (每层 sin(ω0·(xW + b))) → 线性输出 → L2 归一化

SIREN 初始化: 第一层 U(-1/fan_in, 1/fan_in)，后续层 U(-sqrt(6/fan_in)/ω0, sqrt(6/fan_in)/ω0)。
"""

from __future__ import annotations

import math
from typing import Sequence, Union

import numpy as np
from scipy.special import lpmv

from core.errors import DomainError
from encoders.base import Encoder, uniform
from encoders.config import EncoderConfig
from ndmath import Tensor, as_tensor, functional as F


Coordinates = Union[float, Sequence[float], np.ndarray]


def check_coordinates(lon: Coordinates, lat: Coordinates) -> tuple:
    """经纬度范围校验，返回一维 float64 数组"""
    lon_arr = np.atleast_1d(np.asarray(lon, dtype=np.float64))
    lat_arr = np.atleast_1d(np.asarray(lat, dtype=np.float64))
    if lon_arr.shape != lat_arr.shape:
        raise DomainError(f"lon/lat length mismatch: {lon_arr.shape} vs {lat_arr.shape}")
    if not np.all(np.isfinite(lon_arr)) or not np.all(np.isfinite(lat_arr)):
        raise DomainError("coordinates must be finite")
    if np.any(np.abs(lon_arr) > 180.0):
        raise DomainError(f"longitude outside [-180, 180]: {lon_arr[np.abs(lon_arr) > 180.0][0]}")
    if np.any(np.abs(lat_arr) > 90.0):
        raise DomainError(f"latitude outside [-90, 90]: {lat_arr[np.abs(lat_arr) > 90.0][0]}")
    return lon_arr, lat_arr


def sh_basis(lon: Coordinates, lat: Coordinates, degree: int) -> np.ndarray:
    """批量计算球谐特征，返回 N×(L+1)² 数组"""
    if degree < 0:
        raise DomainError(f"SH degree must be non-negative, got {degree}")
    lon_arr, lat_arr = check_coordinates(lon, lat)
    phi = np.radians(lon_arr)
    # cos(θ) = sin(lat)
    x = np.sin(np.radians(lat_arr))
    at_pole = np.abs(lat_arr) == 90.0

    columns = []
    for l in range(degree + 1):
        for m in range(-l, l + 1):
            am = abs(m)
            norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - am) / math.factorial(l + am))
            # lpmv 含 Condon-Shortley 相位，乘 (-1)^m 抵消
            legendre = lpmv(am, l, x) * (-1) ** am
            if m == 0:
                columns.append(norm * legendre)
                continue
            if m > 0:
                value = math.sqrt(2.0) * norm * legendre * np.cos(m * phi)
            else:
                value = math.sqrt(2.0) * norm * legendre * np.sin(am * phi)
            columns.append(np.where(at_pole, 0.0, value))
    return np.stack(columns, axis=1)


def sh_encode(lon: float, lat: float, degree: int) -> Tensor:
    """
    单点球谐编码

    Raises:
        DomainError: 坐标超出范围
    """
    return Tensor(sh_basis(lon, lat, degree)[0])


class LocationEncoder(Encoder):
    """SH + SIREN location encoder."""

    prefix = "location"

    def __init__(self, config: EncoderConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        self.omega0 = float(config.siren_omega0)
        fan_in = config.sh_features
        self.layers = []
        for i in range(config.siren_layers):
            if i == 0:
                bound = 1.0 / fan_in
            else:
                bound = math.sqrt(6.0 / fan_in) / self.omega0
            weight = self._register(f"layer{i}.weight", uniform(rng, (fan_in, config.siren_hidden), bound))
            bias = self._register(f"layer{i}.bias", uniform(rng, config.siren_hidden, bound))
            self.layers.append((weight, bias))
            fan_in = config.siren_hidden
        bound = math.sqrt(6.0 / fan_in) / self.omega0
        self.out_w = self._register("out.weight", uniform(rng, (fan_in, config.embed_dim), bound))
        self.out_b = self._register("out.bias", uniform(rng, config.embed_dim, bound))

    def features(self, lon: Coordinates, lat: Coordinates) -> np.ndarray:
        return sh_basis(lon, lat, self.config.sh_degree)

    def first_preactivations(self, lon: Coordinates, lat: Coordinates) -> np.ndarray:
        """第一层正弦之前的输入 ω0·(xW + b)，用于检查初始化尺度"""
        weight, bias = self.layers[0]
        return self.omega0 * (self.features(lon, lat) @ weight.data + bias.data)

    def forward(self, lon: Coordinates, lat: Coordinates) -> Tensor:
        """批量编码，返回 N×D 单位向量"""
        x = as_tensor(self.features(lon, lat))
        for weight, bias in self.layers:
            x = F.sin(self.omega0 * (F.matmul(x, weight) + bias))
        return F.l2_normalize(F.matmul(x, self.out_w) + self.out_b)


def encode_location(lon: float, lat: float, encoder: LocationEncoder) -> Tensor:
    """编码单个坐标"""
    return encoder.forward(lon, lat).reshape(encoder.config.embed_dim)
