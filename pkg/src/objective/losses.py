"""
Contrastive Objectives
======================

- contrastive_loss: 对称交叉熵 (图像为锚点对文本列做 softmax，反之亦然)，取两者均值
- geo_loss: α·(L_img + L_txt)/2 + (1-α)·(L_loc + L_iloc)/2，
  L_loc 以位置为锚点对图像列做 softmax，L_iloc 以图像为锚点对位置列做 softmax

所有分量共享同一个温度 τ；同标签的批内样本不做掩码，仍然互为负样本。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from core.errors import ContractError, DomainError
from ndmath import Tensor, functional as F
from objective.temperature import Temperature


UNIT_NORM_TOLERANCE = 1e-6


@dataclass
class BatchEmbeddings:
    """
    一个批次的嵌入

    Attributes:
        img: N×D 图像嵌入
        txt: N×D 文本嵌入
        loc: 可选 N×D 位置嵌入
    """
    img: Tensor
    txt: Tensor
    loc: Optional[Tensor] = None

    def __post_init__(self):
        if self.img.ndim != 2 or self.txt.ndim != 2:
            raise ContractError(f"embeddings must be N×D, got {self.img.shape} and {self.txt.shape}")
        if self.img.shape != self.txt.shape:
            raise ContractError(f"img/txt shape mismatch: {self.img.shape} vs {self.txt.shape}")
        if self.loc is not None and self.loc.shape != self.img.shape:
            raise ContractError(f"loc shape {self.loc.shape} does not match {self.img.shape}")
        for name, tensor in (("img", self.img), ("txt", self.txt), ("loc", self.loc)):
            if tensor is None:
                continue
            norms = np.linalg.norm(tensor.data, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE):
                raise ContractError(f"{name} rows must be unit-norm")

    @property
    def size(self) -> int:
        return self.img.shape[0]


def anchored_cross_entropy(anchors: Tensor, candidates: Tensor, temp: Temperature) -> Tensor:
    """
    以 anchors 的每一行为锚点、对 candidates 的全部行做 softmax 的交叉熵

        -1/N Σ_i log softmax_j(a_i · c_j / τ)[i]
    """
    logits = F.matmul(anchors, F.transpose(candidates)) * temp.inverse()
    return -F.mean(F.diagonal(F.log_softmax(logits)))


def contrastive_components(batch: BatchEmbeddings, temp: Temperature) -> Dict[str, Tensor]:
    components = {
        "img": anchored_cross_entropy(batch.img, batch.txt, temp),
        "txt": anchored_cross_entropy(batch.txt, batch.img, temp),
    }
    if batch.loc is not None:
        components["loc"] = anchored_cross_entropy(batch.loc, batch.img, temp)
        components["iloc"] = anchored_cross_entropy(batch.img, batch.loc, temp)
    return components


def contrastive_loss(batch: BatchEmbeddings, temp: Temperature) -> Tensor:
    """
    CLOSP 对称对比损失 (L_img + L_txt) / 2

    空批次在构造 Tensor 时已被 DimensionError 拒绝。
    """
    loss_img = anchored_cross_entropy(batch.img, batch.txt, temp)
    loss_txt = anchored_cross_entropy(batch.txt, batch.img, temp)
    return (loss_img + loss_txt) * 0.5


def geo_loss(batch: BatchEmbeddings, temp: Temperature, alpha: float = 0.5) -> Tensor:
    """
    GeoCLOSP 损失 α·(L_img+L_txt)/2 + (1-α)·(L_loc+L_iloc)/2

    Raises:
        ContractError: 缺少位置嵌入
        DomainError: alpha 不在 [0, 1]
    """
    if batch.loc is None:
        raise ContractError("geo_loss requires location embeddings")
    if not (0.0 <= alpha <= 1.0):
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    parts = contrastive_components(batch, temp)
    semantic = (parts["img"] + parts["txt"]) * 0.5
    geographic = (parts["loc"] + parts["iloc"]) * 0.5
    return semantic * alpha + geographic * (1.0 - alpha)
