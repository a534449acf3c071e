"""
Training Loop
=============

每一步:
    compose_batch → 编码文本 / 图像 (/ 位置) → contrastive_loss 或 geo_loss
    → 反向传播 → 对全部参数 (含 log_tau) 执行 Adam

总步数 = epochs × floor(训练样本数 / N)。损失或梯度非有限时以 NumericError 中止并报告步号。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from loguru import logger

from core.errors import DataError, NumericError
from core.seeding import substream
from corpus.data_model import CorpusItem
from encoders.model import ClospModel
from ndmath import Tensor, backward, concat
from objective.losses import BatchEmbeddings, contrastive_loss, geo_loss
from trainer.batching import Batch, compose_batch, steps_per_epoch
from trainer.checkpoint import ModelCheckpoint
from trainer.config import TrainConfig
from trainer.optimizer import Adam, lr_schedule


@dataclass(frozen=True)
class EpochRecord:
    """一轮训练的记录: 平均损失、该轮最后一步的学习率、轮末温度"""
    epoch: int
    mean_loss: float
    lr: float
    tau: float

    def to_dict(self) -> dict:
        return {"epoch": self.epoch, "mean_loss": self.mean_loss, "lr": self.lr, "tau": self.tau}


@dataclass
class TrainResult:
    checkpoint: ModelCheckpoint
    trace: List[EpochRecord] = field(default_factory=list)

    @property
    def step(self) -> int:
        return self.checkpoint.step


class Trainer:
    """
    单线程训练器

    模型参数只由本对象在 step() 中原地更新。
    """

    def __init__(self, config: TrainConfig, train_items: Sequence[CorpusItem],
                 model: Optional[ClospModel] = None):
        self.config = config
        self.items = list(train_items)
        self.modalities = config.training_modalities
        self._check_items()
        self.model = model or ClospModel(config.encoder_config(), substream(config.seed, "init"))
        self.rng = substream(config.seed, "batching")
        self.params = list(self.model.parameters().values())
        self.optimizer = Adam(self.params)
        self.steps_per_epoch = steps_per_epoch(self.items, config.batch_size, self.modalities)
        self.total_steps = config.epochs * self.steps_per_epoch
        self.warmup_steps = config.resolved_warmup(self.total_steps)
        self.step_count = 0

    def _check_items(self) -> None:
        if not self.items:
            raise DataError("training set is empty")
        sides = {item.image_side for item in self.items}
        if sides != {self.config.image_side}:
            raise DataError(f"corpus image side {sorted(sides)} does not match config image_side={self.config.image_side}")

    # ------------------------------------------------------------------
    # 单步
    # ------------------------------------------------------------------

    def embed_batch(self, batch: Batch) -> BatchEmbeddings:
        """编码一个批次；行顺序为 batch.grouped() 的顺序"""
        grouped = batch.grouped()
        images = grouped.images()
        parts = [self.model.vision[modality].forward(images[modality]) for modality in images]
        img = parts[0] if len(parts) == 1 else concat(parts, axis=0)
        txt = self.model.text.forward([item.labels for item in grouped.items])
        loc = None
        if self.config.use_location:
            loc = self.model.location.forward(grouped.lon, grouped.lat)
        return BatchEmbeddings(img=img, txt=txt, loc=loc)

    def loss(self, embeddings: BatchEmbeddings) -> Tensor:
        if self.config.use_location:
            return geo_loss(embeddings, self.model.temperature, self.config.alpha)
        return contrastive_loss(embeddings, self.model.temperature)

    def step(self) -> tuple:
        """执行一步优化，返回 (损失, 学习率)"""
        batch = compose_batch(self.items, self.config.per_modality, self.rng, self.modalities)
        loss = self.loss(self.embed_batch(batch))
        value = loss.item()
        if not np.isfinite(value):
            raise NumericError(f"non-finite loss {value}", step=self.step_count)
        grads = backward(loss, self.params)
        if not all(np.all(np.isfinite(grad)) for grad in grads):
            raise NumericError("non-finite gradient", step=self.step_count)
        lr = lr_schedule(self.step_count, self.total_steps, self.warmup_steps, self.config.max_lr)
        self.optimizer.step(grads, lr)
        logger.debug(f"step {self.step_count}: loss={value:.6f} lr={lr:.3e}")
        self.step_count += 1
        return value, lr

    # ------------------------------------------------------------------
    # 训练
    # ------------------------------------------------------------------

    def run(self, on_epoch: Optional[Callable[[EpochRecord], None]] = None) -> TrainResult:
        mode = "GeoCLOSP" if self.config.use_location else "CLOSP"
        logger.info(
            f"Training {mode} ({self.modalities.value}): {len(self.items)} items, "
            f"{self.config.epochs} epochs × {self.steps_per_epoch} steps, batch {self.config.batch_size}, "
            f"warmup {self.warmup_steps}, alpha={self.config.alpha}"
        )
        trace: List[EpochRecord] = []
        for epoch in range(1, self.config.epochs + 1):
            losses, lr = [], 0.0
            for _ in range(self.steps_per_epoch):
                value, lr = self.step()
                losses.append(value)
            record = EpochRecord(epoch, float(np.mean(losses)), lr, self.model.temperature.tau)
            trace.append(record)
            logger.info(f"epoch {epoch}/{self.config.epochs}: loss={record.mean_loss:.4f} "
                        f"lr={record.lr:.3e} tau={record.tau:.4f}")
            if on_epoch is not None:
                on_epoch(record)
        checkpoint = ModelCheckpoint.from_model(self.model, self.config, self.step_count)
        return TrainResult(checkpoint, trace)


def train(config: TrainConfig, train_items: Sequence[CorpusItem]) -> TrainResult:
    """
    训练 CLOSP (use_location=False) 或 GeoCLOSP (use_location=True)

    Raises:
        DataError: 训练集为空、图像尺寸不符或样本不足一个批次
        NumericError: 损失或梯度出现 NaN/Inf，附带步号
    """
    return Trainer(config, train_items).run()
