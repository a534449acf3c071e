"""
Training Configuration
======================

TrainConfig 同时描述优化设置和编码器结构，一个扁平 YAML 文件即可配置一次训练。
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

from config import constants
from config.settings import config_schema, load_flat_config
from core.errors import ConfigError, ContractError, DomainError
from core.vocabulary import Modality
from encoders.config import EncoderConfig


class TrainingModalities(Enum):
    """批次组成: joint 为 M 个 SAR + M 个 MSI，sar / msi 为 2M 个单一模态样本"""
    JOINT = "joint"
    SAR = "sar"
    MSI = "msi"

    @property
    def modalities(self) -> tuple:
        if self is TrainingModalities.JOINT:
            return (Modality.SAR, Modality.MSI)
        return (Modality.SAR,) if self is TrainingModalities.SAR else (Modality.MSI,)

    @classmethod
    def from_string(cls, value: str, default: Optional["TrainingModalities"] = None) -> Optional["TrainingModalities"]:
        if not value:
            return default
        value_lower = value.strip().lower()
        for member in cls:
            if member.value == value_lower:
                return member
        return default


@dataclass
class TrainConfig:
    """
    训练配置

    Attributes:
        epochs: 训练轮数
        batch_size: 批大小 N = 2M
        max_lr: 最大学习率
        warmup_steps: 预热步数，None 表示总步数的 5%
        alpha: 语义项权重；None 时 CLOSP 取 1.0，GeoCLOSP 取 0.5
        seed: 随机种子
        use_location: 是否加入位置对齐 (GeoCLOSP)
        modalities: joint / sar / msi
        embed_dim .. text_hidden: 编码器结构，见 EncoderConfig
    """
    epochs: int = constants.DEFAULT_EPOCHS
    batch_size: int = constants.DEFAULT_BATCH_SIZE
    max_lr: float = constants.DEFAULT_MAX_LR
    warmup_steps: Optional[int] = None
    alpha: Optional[float] = None
    seed: int = 0
    use_location: bool = False
    modalities: str = TrainingModalities.JOINT.value
    embed_dim: int = constants.DEFAULT_EMBED_DIM
    image_side: int = constants.DEFAULT_IMAGE_SIDE
    sh_degree: int = constants.DEFAULT_SH_DEGREE
    siren_layers: int = constants.DEFAULT_SIREN_LAYERS
    siren_hidden: int = constants.DEFAULT_SIREN_HIDDEN
    siren_omega0: float = constants.DEFAULT_SIREN_OMEGA0
    text_hidden: int = constants.DEFAULT_TEXT_HIDDEN

    def __post_init__(self):
        if self.alpha is None:
            self.alpha = 0.5 if self.use_location else 1.0
        self.validate()

    def validate(self) -> None:
        if self.epochs < 1:
            raise ContractError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 2 or self.batch_size % 2:
            raise ContractError(f"batch_size must be a positive even number, got {self.batch_size}")
        if self.max_lr < 0:
            raise DomainError(f"max_lr must be non-negative, got {self.max_lr}")
        if self.warmup_steps is not None and self.warmup_steps < 0:
            raise DomainError(f"warmup_steps must be non-negative, got {self.warmup_steps}")
        if TrainingModalities.from_string(self.modalities) is None:
            raise ContractError(f"modalities must be one of joint, sar, msi; got {self.modalities!r}")
        if self.use_location:
            if self.alpha == 0.0:
                raise DomainError("alpha=0 discards the text alignment and cannot train a retriever")
            if not 0.0 < self.alpha <= 1.0:
                raise DomainError(f"alpha must lie in (0, 1] with use_location, got {self.alpha}")
        elif self.alpha != 1.0:
            raise DomainError(f"alpha must be 1 without use_location, got {self.alpha}")
        self.encoder_config()

    @property
    def training_modalities(self) -> TrainingModalities:
        return TrainingModalities.from_string(self.modalities)

    @property
    def per_modality(self) -> int:
        """M = N / 2"""
        return self.batch_size // 2

    def encoder_config(self) -> EncoderConfig:
        return EncoderConfig(
            embed_dim=self.embed_dim,
            image_side=self.image_side,
            sh_degree=self.sh_degree,
            siren_layers=self.siren_layers,
            siren_hidden=self.siren_hidden,
            siren_omega0=self.siren_omega0,
            text_hidden=self.text_hidden,
        )

    def resolved_warmup(self, total_steps: int) -> int:
        """预热步数，总是小于总步数"""
        if self.warmup_steps is None:
            warmup = int(round(constants.DEFAULT_WARMUP_FRACTION * total_steps))
        else:
            warmup = self.warmup_steps
        return max(0, min(warmup, total_steps - 1))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        return cls(**data)

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides: Any) -> "TrainConfig":
        """
        读取扁平 YAML 配置

        Args:
            path: 配置文件路径
            overrides: 命令行覆盖值 (None 值忽略)

        Raises:
            ConfigError: 语法、键或取值错误
        """
        values = load_flat_config(path, config_schema(cls))
        values.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls.from_dict(values)
        except (ContractError, DomainError) as exc:
            raise ConfigError(f"{path}: {exc}") from exc
