"""
Model Checkpoint
================

ModelCheckpoint 保存全部编码器参数 (含 log_tau)、训练配置、步数与格式版本。
二进制读写见 storage.checkpoint。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from config import constants
from core.errors import FormatError
from core.vocabulary import VOCABULARY
from encoders.config import EncoderConfig
from encoders.model import ClospModel
from storage.container import ContainerHeader
from trainer.config import TrainConfig


@dataclass
class ModelCheckpoint:
    """
    训练结果

    Attributes:
        train_config: 训练配置 (编码器结构由它导出)
        state: {参数名: 数组}
        step: 已执行的优化步数
        version: 容器格式版本
        vocabulary: 词表哈希
    """
    train_config: TrainConfig
    state: Dict[str, np.ndarray]
    step: int = 0
    version: int = constants.CONTAINER_VERSION
    vocabulary: str = field(default_factory=VOCABULARY.digest)

    @property
    def encoder_config(self) -> EncoderConfig:
        return self.train_config.encoder_config()

    @property
    def tau(self) -> float:
        return float(np.exp(self.state["temperature.log_tau"][0]))

    @classmethod
    def from_model(cls, model: ClospModel, train_config: TrainConfig, step: int) -> "ModelCheckpoint":
        return cls(train_config=train_config, state=model.state(), step=step)

    def build_model(self) -> ClospModel:
        """按检查点重建模型，参数与保存时逐位一致"""
        model = ClospModel(self.encoder_config, np.random.default_rng(0))
        model.load_state(self.state)
        return model

    def header(self) -> ContainerHeader:
        config = self.encoder_config
        return ContainerHeader(
            magic=constants.CHECKPOINT_MAGIC,
            version=self.version,
            embed_dim=config.embed_dim,
            image_side=config.image_side,
            sh_degree=config.sh_degree,
        )

    def describe(self) -> str:
        return f"{self.header().describe()} vocab={self.vocabulary}"

    def to_blocks(self) -> Dict[str, Any]:
        return {
            "meta": {
                "train_config": self.train_config.to_dict(),
                "step": self.step,
                "vocabulary": self.vocabulary,
            },
            "params": {name: self.state[name] for name in sorted(self.state)},
        }

    @classmethod
    def from_blocks(cls, header: ContainerHeader, blocks: Dict[str, Any]) -> "ModelCheckpoint":
        try:
            meta = blocks["meta"]
            params = blocks["params"]
            train_config = TrainConfig.from_dict(meta["train_config"])
        except (KeyError, TypeError) as exc:
            raise FormatError(f"checkpoint is missing block {exc}") from exc
        checkpoint = cls(
            train_config=train_config,
            state={name: np.asarray(value, dtype=np.float64) for name, value in params.items()},
            step=int(meta.get("step", 0)),
            version=header.version,
            vocabulary=meta.get("vocabulary", ""),
        )
        if checkpoint.header() != header:
            raise FormatError("checkpoint header disagrees with its configuration",
                              expected=checkpoint.header().describe(), found=header.describe())
        return checkpoint


def checkpoint_compatible(checkpoint: ModelCheckpoint, image_side: int,
                          embed_dim: Optional[int] = None,
                          vocabulary: Optional[str] = None) -> None:
    """
    检查检查点能否用于给定的语料或索引

    Args:
        checkpoint: 检查点
        image_side: 语料图像边长 H
        embed_dim: 可选，索引的嵌入维度 D
        vocabulary: 可选，对方的词表哈希，默认为当前词表

    Raises:
        FormatError: D、H 或词表哈希不一致，错误信息带双方头部描述
    """
    config = checkpoint.encoder_config
    vocabulary = vocabulary or VOCABULARY.digest()
    expected_dim = config.embed_dim if embed_dim is None else embed_dim
    found = f"D={expected_dim} H={image_side} vocab={vocabulary}"
    if config.image_side != image_side or config.embed_dim != expected_dim or checkpoint.vocabulary != vocabulary:
        raise FormatError("checkpoint is incompatible with the data", expected=checkpoint.describe(), found=found)
