"""
Corpus Data Model
=================

语料库数据模型:

- CorpusItem: 单个卫星样本 (模态、图像、标签集合、经纬度、灾害标签、来源)
- Query: 标签集合查询
- SplitResult: 训练/检索划分结果
- Corpus: 不可变的样本集合，提供按模态、按 id 的访问
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import ContractError, DataError, DomainError, ShapeError
from core.vocabulary import VOCABULARY, CrisisType, Modality


# ============================================================================
# 样本
# ============================================================================

@dataclass(frozen=True, eq=False)
class CorpusItem:
    """
    语料库中的一个卫星样本

    Attributes:
        id: 唯一的非负整数
        modality: SAR 或 MSI
        image: C×H×H float64 数组 (SAR: C=2, MSI: C=12)
        labels: 非空标签集合 (规范形式)
        lon: 经度 (度)
        lat: 纬度 (度)
        crisis: 可选灾害类型，存在时对应的灾害标签必须在 labels 中
        source: 来源描述
    """
    id: int
    modality: Modality
    image: np.ndarray
    labels: FrozenSet[str]
    lon: float
    lat: float
    crisis: Optional[CrisisType] = None
    source: str = ""

    def __post_init__(self):
        if self.id < 0:
            raise ContractError(f"item id must be non-negative, got {self.id}")
        object.__setattr__(self, "labels", VOCABULARY.label_set(self.labels))
        image = np.asarray(self.image, dtype=np.float64)
        if image.ndim != 3 or image.shape[0] != self.modality.channels or image.shape[1] != image.shape[2]:
            raise ShapeError(
                f"item {self.id}: {self.modality.value} image must be "
                f"{self.modality.channels}×H×H, got {image.shape}"
            )
        object.__setattr__(self, "image", image)
        if not (-180.0 <= self.lon <= 180.0 and -90.0 <= self.lat <= 90.0):
            raise DomainError(f"item {self.id}: coordinates out of range ({self.lon}, {self.lat})")
        if self.crisis is not None and self.crisis.label not in self.labels:
            raise ContractError(f"item {self.id}: crisis {self.crisis.value} without label '{self.crisis.label}'")

    @property
    def image_side(self) -> int:
        return self.image.shape[1]

    def to_dict(self) -> Dict[str, Any]:
        """元数据字典 (不含图像)"""
        return {
            "id": self.id,
            "modality": self.modality.value,
            "labels": VOCABULARY.sorted(self.labels),
            "lon": self.lon,
            "lat": self.lat,
            "crisis": self.crisis.value if self.crisis else None,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], image: np.ndarray) -> "CorpusItem":
        modality = Modality.from_string(data.get("modality", ""))
        if modality is None:
            raise DataError(f"item {data.get('id')}: unknown modality {data.get('modality')!r}")
        return cls(
            id=int(data["id"]),
            modality=modality,
            image=image,
            labels=frozenset(data.get("labels", [])),
            lon=float(data["lon"]),
            lat=float(data["lat"]),
            crisis=CrisisType.from_string(data.get("crisis")),
            source=data.get("source", ""),
        )


# ============================================================================
# 查询
# ============================================================================

@dataclass(frozen=True)
class Query:
    """标签集合查询 L_q，1 <= |L_q| <= 12"""
    labels: FrozenSet[str]

    def __post_init__(self):
        object.__setattr__(self, "labels", VOCABULARY.label_set(self.labels))

    @classmethod
    def parse(cls, text: str) -> "Query":
        return cls(VOCABULARY.parse(text))

    @property
    def sort_key(self) -> Tuple[int, Tuple[int, ...]]:
        """规范排序: 先按长度，再按词表顺序"""
        return len(self.labels), VOCABULARY.indices(self.labels)

    def render(self) -> str:
        return VOCABULARY.render(self.labels)

    def __len__(self) -> int:
        return len(self.labels)


# ============================================================================
# 划分结果
# ============================================================================

@dataclass(frozen=True)
class SplitResult:
    """训练集与检索集的不相交划分，以及两者标签分布的 χ² 检验"""
    train_ids: Tuple[int, ...]
    retrieval_ids: Tuple[int, ...]
    chi2_stat: float
    p_value: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "train_ids": list(self.train_ids),
            "retrieval_ids": list(self.retrieval_ids),
            "chi2_stat": self.chi2_stat,
            "p_value": self.p_value,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SplitResult":
        return cls(
            train_ids=tuple(int(i) for i in data["train_ids"]),
            retrieval_ids=tuple(int(i) for i in data["retrieval_ids"]),
            chi2_stat=float(data["chi2_stat"]),
            p_value=float(data["p_value"]),
        )


# ============================================================================
# 语料库
# ============================================================================

@dataclass(frozen=True)
class Corpus:
    """
    不可变样本集合

    Attributes:
        items: 按 id 升序排列的样本
        metadata: 生成器报告的元数据 (标签边际分布等)
    """
    items: Tuple[CorpusItem, ...]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        items = tuple(sorted(self.items, key=lambda item: item.id))
        ids = [item.id for item in items]
        if len(set(ids)) != len(ids):
            raise ContractError("corpus item ids must be unique")
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "_by_id", {item.id: item for item in items})

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[CorpusItem]:
        return iter(self.items)

    def __getitem__(self, item_id: int) -> CorpusItem:
        return self._by_id[item_id]

    @property
    def ids(self) -> List[int]:
        return [item.id for item in self.items]

    @property
    def image_side(self) -> int:
        if not self.items:
            raise DataError("empty corpus has no image side")
        return self.items[0].image_side

    def of_modality(self, modality: Modality) -> List[CorpusItem]:
        return [item for item in self.items if item.modality is modality]

    def subset(self, ids: Iterable[int]) -> "Corpus":
        """按 id 取子集；未知 id 抛出 DataError"""
        selected = []
        for item_id in ids:
            if item_id not in self._by_id:
                raise DataError(f"unknown item id {item_id}")
            selected.append(self._by_id[item_id])
        return Corpus(tuple(selected), dict(self.metadata))

    def label_sets(self) -> List[FrozenSet[str]]:
        return [item.labels for item in self.items]

    def label_matrix(self) -> np.ndarray:
        """N×12 多热标签矩阵 (词表顺序)"""
        matrix = np.zeros((len(self.items), len(VOCABULARY)), dtype=np.int64)
        for row, item in enumerate(self.items):
            matrix[row, list(VOCABULARY.indices(item.labels))] = 1
        return matrix


def stack_images(items: Sequence[CorpusItem]) -> np.ndarray:
    """把同一模态的样本图像堆叠为 N×C×H×H"""
    if not items:
        raise DataError("no images to stack")
    return np.stack([item.image for item in items], axis=0)
