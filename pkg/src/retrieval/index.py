"""
Embedding Index
===============

检索语料的归一化嵌入存储与精确 top-K 内积搜索。

- 内积即余弦相似度 (向量均为单位长度)
- 排序: 分数降序，并列时 id 升序
- 融合: 两个模态索引的结果各自做 min-max 归一化后合并
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from core.errors import ContractError, DataError
from core.vocabulary import Modality
from corpus.data_model import CorpusItem, stack_images
from encoders.model import ClospModel
from ndmath import Tensor


UNIT_NORM_TOLERANCE = 1e-6


# ============================================================================
# 数据类型
# ============================================================================

@dataclass(frozen=True)
class EmbeddingRecord:
    """索引中的一条记录；labels 只用于评估"""
    id: int
    modality: Modality
    vector: np.ndarray
    lon: float
    lat: float
    labels: FrozenSet[str]


@dataclass(frozen=True)
class RankedList:
    """按分数降序排列的 (id, score) 列表"""
    ids: Tuple[int, ...] = ()
    scores: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.ids) != len(self.scores):
            raise ContractError("ranked list ids and scores differ in length")

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[Tuple[int, float]]:
        return iter(zip(self.ids, self.scores))

    def top(self, k: int) -> "RankedList":
        return RankedList(self.ids[:k], self.scores[:k])


def rank_order(ids: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """分数降序、id 升序的排列下标"""
    return np.lexsort((ids, -scores))


# ============================================================================
# 索引
# ============================================================================

class EmbeddingIndex:
    """
    不可变的嵌入索引

    构建后只读，可被多个搜索并发使用。

    Attributes:
        provenance: 构建该索引的检查点信息 (D, H, L, 词表哈希, 步数)
    """

    def __init__(self, ids: Sequence[int], modalities: Sequence[Modality], vectors: np.ndarray,
                 lon: Sequence[float], lat: Sequence[float], labels: Sequence[FrozenSet[str]],
                 provenance: Optional[Dict[str, Any]] = None):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.modalities = tuple(modalities)
        self.vectors = np.array(vectors, dtype=np.float64)
        self.lon = np.asarray(lon, dtype=np.float64)
        self.lat = np.asarray(lat, dtype=np.float64)
        self.labels = tuple(frozenset(l) for l in labels)
        self.provenance = dict(provenance or {})
        self._validate()
        self.vectors.setflags(write=False)

    def _validate(self) -> None:
        n = len(self.ids)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != n:
            raise ContractError(f"index vectors must be {n}×D, got {self.vectors.shape}")
        if not (len(self.modalities) == len(self.lon) == len(self.lat) == len(self.labels) == n):
            raise ContractError("index columns differ in length")
        if len(np.unique(self.ids)) != n:
            raise ContractError("index ids must be unique")
        if n:
            norms = np.linalg.norm(self.vectors, axis=1)
            if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOLERANCE):
                raise ContractError("index vectors must be unit-norm")

    @classmethod
    def from_records(cls, records: Sequence[EmbeddingRecord], embed_dim: int,
                     provenance: Optional[Dict[str, Any]] = None) -> "EmbeddingIndex":
        vectors = np.stack([r.vector for r in records]) if records else np.zeros((0, embed_dim))
        return cls([r.id for r in records], [r.modality for r in records], vectors,
                   [r.lon for r in records], [r.lat for r in records], [r.labels for r in records],
                   provenance)

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def embed_dim(self) -> int:
        return self.vectors.shape[1]

    def records(self) -> List[EmbeddingRecord]:
        return [
            EmbeddingRecord(int(self.ids[i]), self.modalities[i], self.vectors[i],
                            float(self.lon[i]), float(self.lat[i]), self.labels[i])
            for i in range(len(self))
        ]

    def labels_of(self) -> Dict[int, FrozenSet[str]]:
        return {int(item_id): labels for item_id, labels in zip(self.ids, self.labels)}

    def restrict(self, modality: Optional[Modality]) -> "EmbeddingIndex":
        """只保留一个模态的记录；modality 为 None 时返回自身"""
        if modality is None:
            return self
        keep = [i for i, m in enumerate(self.modalities) if m is modality]
        return EmbeddingIndex(self.ids[keep], [self.modalities[i] for i in keep], self.vectors[keep],
                              self.lon[keep], self.lat[keep], [self.labels[i] for i in keep],
                              self.provenance)


# ============================================================================
# 构建与搜索
# ============================================================================

def index_corpus(model: Union[ClospModel, Any], items: Sequence[CorpusItem]) -> EmbeddingIndex:
    """
    用视觉编码器为语料建立索引

    Args:
        model: ClospModel 或带 build_model() 的检查点
        items: 检索语料样本

    Returns:
        每个样本一条记录，按 id 升序
    """
    provenance: Dict[str, Any] = {}
    if not isinstance(model, ClospModel):
        provenance = {"vocabulary": model.vocabulary, "checkpoint_step": model.step}
        model = model.build_model()
    provenance.update({
        "embed_dim": model.config.embed_dim,
        "image_side": model.config.image_side,
        "sh_degree": model.config.sh_degree,
    })

    ordered = sorted(items, key=lambda item: item.id)
    vectors: Dict[int, np.ndarray] = {}
    for modality in Modality:
        members = [item for item in ordered if item.modality is modality]
        if not members:
            continue
        embedded = model.embed_images(stack_images(members), modality)
        for item, vector in zip(members, embedded):
            vectors[item.id] = vector

    records = [EmbeddingRecord(item.id, item.modality, vectors[item.id], item.lon, item.lat, item.labels)
               for item in ordered]
    index = EmbeddingIndex.from_records(records, model.config.embed_dim, provenance)
    logger.info(f"Indexed {len(index)} items (D={model.config.embed_dim})")
    return index


def _check_query(index: EmbeddingIndex, query_vector: np.ndarray, k: int) -> np.ndarray:
    if k < 1:
        raise ContractError(f"K must be >= 1, got {k}")
    if isinstance(query_vector, Tensor):
        query_vector = query_vector.data
    query = np.asarray(query_vector, dtype=np.float64).reshape(-1)
    if abs(np.linalg.norm(query) - 1.0) > UNIT_NORM_TOLERANCE:
        raise ContractError("query vector must be unit-norm")
    if len(index) and query.shape[0] != index.embed_dim:
        raise ContractError(f"query dimension {query.shape[0]} does not match index D={index.embed_dim}")
    return query


def search(index: EmbeddingIndex, query_vector: np.ndarray, k: int) -> RankedList:
    """
    精确 top-K 内积搜索

    Returns:
        min(K, |index|) 个结果；空索引返回空列表

    Raises:
        ContractError: K < 1、查询向量非单位长度或维度不符
    """
    query = _check_query(index, query_vector, k)
    if len(index) == 0:
        return RankedList()
    scores = index.vectors @ query
    order = rank_order(index.ids, scores)[:k]
    return RankedList(tuple(int(i) for i in index.ids[order]), tuple(float(s) for s in scores[order]))


def min_max(scores: Sequence[float]) -> np.ndarray:
    """min-max 归一化到 [0, 1]；全部相等 (含单元素) 时映射为 1.0"""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        return scores
    low, high = scores.min(), scores.max()
    if high == low:
        return np.ones_like(scores)
    return (scores - low) / (high - low)


def fuse_rankings(list_a: RankedList, list_b: RankedList, k: int) -> RankedList:
    """
    融合两个来自不相交 id 空间的排序列表

    Raises:
        ContractError: id 重叠或 K < 1
    """
    if k < 1:
        raise ContractError(f"K must be >= 1, got {k}")
    overlap = set(list_a.ids) & set(list_b.ids)
    if overlap:
        raise ContractError(f"fused lists share ids {sorted(overlap)[:5]}")
    ids = np.array(list_a.ids + list_b.ids, dtype=np.int64)
    if ids.size == 0:
        return RankedList()
    scores = np.concatenate([min_max(list_a.scores), min_max(list_b.scores)])
    order = rank_order(ids, scores)[:k]
    return RankedList(tuple(int(i) for i in ids[order]), tuple(float(s) for s in scores[order]))


def search_fused(index_a: EmbeddingIndex, query_a: np.ndarray, index_b: EmbeddingIndex,
                 query_b: np.ndarray, k: int) -> RankedList:
    """
    分别搜索两个模态索引后融合

    两个索引可以来自两个专用检查点，因此各自使用自己的查询向量。
    """
    return fuse_rankings(search(index_a, query_a, k), search(index_b, query_b, k), k)


def check_disjoint(index_a: EmbeddingIndex, index_b: EmbeddingIndex) -> None:
    if set(index_a.ids.tolist()) & set(index_b.ids.tolist()):
        raise DataError("fused indexes must cover disjoint items")
