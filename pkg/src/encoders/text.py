"""
Text Encoder
============

标签集合文本编码器：

    标签嵌入表 (12×h) → 集合均值池化 → 两层 MLP → L2 归一化

均值池化与标签顺序无关，对应查询的无序集合语义。
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from core.vocabulary import VOCABULARY, LabelVocabulary
from encoders.base import Encoder, linear_init
from encoders.config import EncoderConfig
from ndmath import Tensor, as_tensor, functional as F


class TextEncoder(Encoder):
    """Label-set encoder E_t."""

    prefix = "text"

    def __init__(self, config: EncoderConfig, rng: np.random.Generator, vocabulary: LabelVocabulary = VOCABULARY):
        super().__init__()
        self.config = config
        self.vocabulary = vocabulary
        h = config.text_hidden
        self.embedding = self._register("embedding", rng.normal(0.0, 1.0, size=(len(vocabulary), h)))
        w1, b1 = linear_init(rng, h, h)
        self.w1 = self._register("w1", w1)
        self.b1 = self._register("b1", b1)
        w2, b2 = linear_init(rng, h, config.embed_dim)
        self.w2 = self._register("w2", w2)
        self.b2 = self._register("b2", b2)

    def pooling_matrix(self, label_sets: Sequence[Iterable[str]]) -> np.ndarray:
        """每行是一个标签集合的归一化多热向量 (行和为 1)"""
        pooling = np.zeros((len(label_sets), len(self.vocabulary)))
        for row, labels in enumerate(label_sets):
            indices = self.vocabulary.indices(self.vocabulary.label_set(labels))
            pooling[row, list(indices)] = 1.0 / len(indices)
        return pooling

    def forward(self, label_sets: Sequence[Iterable[str]]) -> Tensor:
        """批量编码，返回 N×D 单位向量"""
        pooled = F.matmul(as_tensor(self.pooling_matrix(label_sets)), self.embedding)
        hidden = F.relu(F.matmul(pooled, self.w1) + self.b1)
        return F.l2_normalize(F.matmul(hidden, self.w2) + self.b2)


def encode_text(labels: Iterable[str], encoder: TextEncoder) -> Tensor:
    """
    编码单个标签集合

    Raises:
        VocabularyError: 未知标签
        ContractError: 空集合
    """
    return encoder.forward([labels]).reshape(encoder.config.embed_dim)
