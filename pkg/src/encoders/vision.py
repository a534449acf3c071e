"""
Vision Encoders
===============

SAR 与 MSI 各自独立的卷积编码器 (不共享权重)：

    3 个步长为 2 的 3×3 卷积块 (C→16→32→D, ReLU) → 全局平均池化 → 线性头 → L2 归一化
"""

from __future__ import annotations

import numpy as np

from core.errors import ShapeError
from core.vocabulary import Modality
from encoders.base import Encoder, conv_init, linear_init
from encoders.config import EncoderConfig
from ndmath import Tensor, as_tensor, functional as F


CONV_CHANNELS = (16, 32)
KERNEL = 3
STRIDE = 2
PADDING = 1


class VisionEncoder(Encoder):
    """Per-modality image encoder E_v."""

    def __init__(self, modality: Modality, config: EncoderConfig, rng: np.random.Generator):
        super().__init__()
        self.modality = modality
        self.prefix = modality.value.lower()
        self.config = config
        widths = (modality.channels, *CONV_CHANNELS, config.embed_dim)
        self.convs = []
        for block, (c_in, c_out) in enumerate(zip(widths[:-1], widths[1:]), start=1):
            weight, bias = conv_init(rng, c_out, c_in, KERNEL)
            self.convs.append((
                self._register(f"conv{block}.weight", weight),
                self._register(f"conv{block}.bias", bias),
            ))
        head_w, head_b = linear_init(rng, config.embed_dim, config.embed_dim)
        self.head_w = self._register("head.weight", head_w)
        self.head_b = self._register("head.bias", head_b)

    def check_images(self, images: np.ndarray) -> np.ndarray:
        """校验 N×C×H×H 批次的通道数与空间尺寸"""
        if isinstance(images, Tensor):
            images = images.data
        images = np.asarray(images, dtype=np.float64)
        if images.ndim == 3:
            images = images[np.newaxis]
        side = self.config.image_side
        if images.ndim != 4:
            raise ShapeError(f"{self.modality.value} images must be C×H×H, got shape {images.shape}")
        if images.shape[1] != self.modality.channels:
            raise ShapeError(
                f"{self.modality.value} expects {self.modality.channels} channels, got {images.shape[1]}"
            )
        if images.shape[2:] != (side, side):
            raise ShapeError(f"expected spatial extent {side}×{side}, got {images.shape[2]}×{images.shape[3]}")
        return images

    def forward(self, images: np.ndarray) -> Tensor:
        """批量编码，返回 N×D 单位向量"""
        x = as_tensor(self.check_images(images))
        for weight, bias in self.convs:
            x = F.relu(F.conv2d(x, weight, bias, stride=STRIDE, padding=PADDING))
        n, channels = x.shape[0], x.shape[1]
        pooled = F.mean(F.reshape(x, (n, channels, -1)), axis=-1)
        return F.l2_normalize(F.matmul(pooled, self.head_w) + self.head_b)


def encode_image(image: np.ndarray, modality: Modality, encoder: VisionEncoder) -> Tensor:
    """
    编码单张图像

    Raises:
        ShapeError: 通道数与模态不符，或编码器模态不符
    """
    if encoder.modality is not modality:
        raise ShapeError(f"{modality.value} image routed to the {encoder.modality.value} encoder")
    array = image.data if isinstance(image, Tensor) else np.asarray(image)
    return encoder.forward(array[np.newaxis]).reshape(encoder.config.embed_dim)
