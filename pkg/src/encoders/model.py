"""
CLOSP Model
===========

文本、SAR、MSI、位置四个编码器与可学习温度的组合。
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence

import numpy as np

from core.errors import ContractError
from core.vocabulary import Modality
from encoders.config import EncoderConfig
from encoders.location import LocationEncoder
from encoders.text import TextEncoder
from encoders.vision import VisionEncoder
from ndmath import Tensor
from objective.temperature import Temperature


class ClospModel:
    """
    CLOSP / GeoCLOSP 模型

    编码器在构造后只读用于推理；训练时由单一写者 (trainer) 原地更新参数。
    """

    def __init__(self, config: EncoderConfig, rng: np.random.Generator):
        self.config = config
        self.text = TextEncoder(config, rng)
        self.vision: Dict[Modality, VisionEncoder] = {
            Modality.SAR: VisionEncoder(Modality.SAR, config, rng),
            Modality.MSI: VisionEncoder(Modality.MSI, config, rng),
        }
        self.location = LocationEncoder(config, rng)
        self.temperature = Temperature()

    @property
    def embed_dim(self) -> int:
        return self.config.embed_dim

    def parameters(self) -> Dict[str, Tensor]:
        """全部可训练参数 (名称 -> 张量)，顺序固定"""
        params: Dict[str, Tensor] = {}
        params.update(self.text.parameters())
        params.update(self.vision[Modality.SAR].parameters())
        params.update(self.vision[Modality.MSI].parameters())
        params.update(self.location.parameters())
        params.update(self.temperature.parameters())
        return params

    def load_state(self, state: Dict[str, np.ndarray]) -> None:
        """从 {名称: 数组} 恢复参数，名称和形状必须完全一致"""
        params = self.parameters()
        missing = set(params) - set(state)
        unexpected = set(state) - set(params)
        if missing or unexpected:
            raise ContractError(f"parameter mismatch: missing={sorted(missing)} unexpected={sorted(unexpected)}")
        for name, tensor in params.items():
            array = np.asarray(state[name], dtype=np.float64)
            if array.shape != tensor.shape:
                raise ContractError(f"shape mismatch for {name}: {array.shape} vs {tensor.shape}")
            tensor.data[...] = array

    def state(self) -> Dict[str, np.ndarray]:
        return {name: tensor.data.copy() for name, tensor in self.parameters().items()}

    # ------------------------------------------------------------------
    # 推理接口 (返回 numpy 数组, 不构建计算图以外的状态)
    # ------------------------------------------------------------------

    def embed_texts(self, label_sets: Sequence[Iterable[str]]) -> np.ndarray:
        return self.text.forward(label_sets).data

    def embed_images(self, images: np.ndarray, modality: Modality, chunk: int = 256) -> np.ndarray:
        """分块编码以限制 im2col 的内存占用"""
        images = np.asarray(images)
        if images.shape[0] == 0:
            return np.zeros((0, self.embed_dim))
        parts: List[np.ndarray] = []
        for start in range(0, images.shape[0], chunk):
            parts.append(self.vision[modality].forward(images[start:start + chunk]).data)
        return np.concatenate(parts, axis=0)

    def embed_locations(self, lon: Sequence[float], lat: Sequence[float]) -> np.ndarray:
        return self.location.forward(lon, lat).data
