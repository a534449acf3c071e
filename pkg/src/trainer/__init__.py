"""
trainer
=======

混合模态批次、Adam、预热余弦学习率、训练循环与检查点。
"""

from .batching import Batch, compose_batch, steps_per_epoch
from .checkpoint import ModelCheckpoint, checkpoint_compatible
from .config import TrainConfig, TrainingModalities
from .loop import EpochRecord, Trainer, TrainResult, train
from .optimizer import Adam, AdamState, adam_step, lr_schedule

__all__ = [
    "Batch",
    "compose_batch",
    "steps_per_epoch",
    "ModelCheckpoint",
    "checkpoint_compatible",
    "TrainConfig",
    "TrainingModalities",
    "EpochRecord",
    "Trainer",
    "TrainResult",
    "train",
    "Adam",
    "AdamState",
    "adam_step",
    "lr_schedule",
]
