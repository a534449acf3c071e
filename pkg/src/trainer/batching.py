"""
Mixed-modality batch composition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from core.errors import ContractError, DataError
from core.vocabulary import VOCABULARY, Modality
from corpus.data_model import CorpusItem, stack_images
from trainer.config import TrainingModalities


@dataclass(frozen=True)
class Batch:
    """一个训练批次，items 为打乱后的顺序"""
    items: Tuple[CorpusItem, ...]

    def __len__(self) -> int:
        return len(self.items)

    @property
    def texts(self) -> List[str]:
        return [VOCABULARY.render(item.labels) for item in self.items]

    @property
    def lon(self) -> np.ndarray:
        return np.array([item.lon for item in self.items])

    @property
    def lat(self) -> np.ndarray:
        return np.array([item.lat for item in self.items])

    def grouped(self) -> "Batch":
        """按模态分组 (SAR 在前) 的同一批次，组内保持原顺序"""
        order = sorted(range(len(self.items)), key=lambda i: (self.items[i].modality is not Modality.SAR, i))
        return Batch(tuple(self.items[i] for i in order))

    def images(self) -> Dict[Modality, np.ndarray]:
        """每个模态的 N_m×C×H×H 图像，顺序与 grouped() 一致"""
        result: Dict[Modality, np.ndarray] = {}
        for modality in Modality:
            members = [item for item in self.items if item.modality is modality]
            if members:
                result[modality] = stack_images(members)
        return result


def _pools(items: Sequence[CorpusItem]) -> Dict[Modality, List[CorpusItem]]:
    pools: Dict[Modality, List[CorpusItem]] = {m: [] for m in Modality}
    for item in items:
        pools[item.modality].append(item)
    return pools


def compose_batch(train_items: Sequence[CorpusItem], per_modality: int, rng: np.random.Generator,
                  modalities: TrainingModalities = TrainingModalities.JOINT) -> Batch:
    """
    组成一个 2M 样本的批次

    joint: 每个模态无放回抽取 M 个，交错排列后整体打乱；
    sar / msi: 从单一模态无放回抽取 2M 个后打乱。

    Raises:
        ContractError: M < 1
        DataError: 某个模态的样本不足
    """
    if per_modality < 1:
        raise ContractError(f"items per modality must be >= 1, got {per_modality}")
    pools = _pools(train_items)

    if modalities is TrainingModalities.JOINT:
        draws = []
        for modality in (Modality.SAR, Modality.MSI):
            pool = pools[modality]
            if len(pool) < per_modality:
                raise DataError(f"need {per_modality} {modality.value} items, train set has {len(pool)}")
            picks = rng.choice(len(pool), size=per_modality, replace=False)
            draws.append([pool[i] for i in picks])
        interleaved = [item for pair in zip(*draws) for item in pair]
    else:
        (modality,) = modalities.modalities
        pool = pools[modality]
        if len(pool) < 2 * per_modality:
            raise DataError(f"need {2 * per_modality} {modality.value} items, train set has {len(pool)}")
        picks = rng.choice(len(pool), size=2 * per_modality, replace=False)
        interleaved = [pool[i] for i in picks]

    order = rng.permutation(len(interleaved))
    return Batch(tuple(interleaved[i] for i in order))


def steps_per_epoch(train_items: Sequence[CorpusItem], batch_size: int,
                    modalities: TrainingModalities = TrainingModalities.JOINT) -> int:
    """每轮步数 floor(可用样本数 / N)，丢弃最后不完整的批次"""
    if modalities is TrainingModalities.JOINT:
        available = len(train_items)
    else:
        (modality,) = modalities.modalities
        available = sum(1 for item in train_items if item.modality is modality)
    steps = available // batch_size
    if steps == 0:
        raise DataError(f"train set of {available} items cannot fill a batch of {batch_size}")
    return steps
