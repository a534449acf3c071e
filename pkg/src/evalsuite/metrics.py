"""
Ranking Metrics
===============

分级相关度下的 nDCG@K、阈值相关下的 P@K / R@K，以及均匀随机检索器的解析基线。

- DCG@K = Σ_{i=1..min(K,len)} rel_i / log₂(i+1)，排名 i 从 1 开始
- IDCG@K 取全语料相关度多重集中最大的 K 个
- 随机基线: R@K = K/|D|，P@K = R_q/|D|，nDCG@K = R_m·Σ_{i≤K} 1/log₂(i+1) / IDCG@K
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from config import constants
from core.errors import ContractError, DomainError


def discounts(k: int) -> np.ndarray:
    """1/log₂(i+1), i = 1..k"""
    return 1.0 / np.log2(np.arange(2, k + 2, dtype=np.float64))


def _as_rels(rels: Iterable[int], name: str) -> np.ndarray:
    array = np.asarray(list(rels), dtype=np.float64)
    if np.any(array < 0):
        raise DomainError(f"{name} contains a negative relevance")
    return array


def dcg_at_k(rels: Sequence[int], k: int) -> float:
    rels = np.asarray(rels, dtype=np.float64)[:k]
    return float(np.dot(rels, discounts(len(rels))))


def ideal_dcg_at_k(all_corpus_rels: Sequence[int], k: int) -> float:
    top = np.sort(np.asarray(all_corpus_rels, dtype=np.float64))[::-1][:k]
    return float(np.dot(top, discounts(len(top))))


def ndcg_at_k(retrieved_rels: Sequence[int], all_corpus_rels: Sequence[int], k: int) -> float:
    """
    nDCG@K

    Args:
        retrieved_rels: 按排名排列的检索结果相关度
        all_corpus_rels: 全语料的相关度多重集
        k: 截断

    Returns:
        DCG/IDCG；IDCG 为 0 时返回 0

    Raises:
        ContractError: K < 1
        DomainError: 负相关度
    """
    if k < 1:
        raise ContractError(f"K must be >= 1, got {k}")
    retrieved = _as_rels(retrieved_rels, "retrieved_rels")
    corpus = _as_rels(all_corpus_rels, "all_corpus_rels")
    ideal = ideal_dcg_at_k(corpus, k)
    if ideal == 0.0:
        return 0.0
    return dcg_at_k(retrieved, k) / ideal


def precision_recall_at_k(retrieved_ids: Sequence[int], relevant_ids: Iterable[int], k: int) -> Tuple[float, float]:
    """
    P@K = |top-K ∩ 相关| / K，R@K = |top-K ∩ 相关| / |相关| (相关集为空时 R = 0)
    """
    if k < 1:
        raise ContractError(f"K must be >= 1, got {k}")
    relevant = set(relevant_ids)
    hits = len(set(list(retrieved_ids)[:k]) & relevant)
    precision = hits / k
    recall = hits / len(relevant) if relevant else 0.0
    return precision, recall


@dataclass(frozen=True)
class BaselineMetrics:
    """均匀随机检索器在某个截断下的期望指标"""
    ndcg: float
    precision: float
    recall: float


def random_baseline(corpus_size: int, query_rels: Sequence[int], k: int) -> BaselineMetrics:
    """
    均匀随机检索器的解析基线

    Args:
        corpus_size: |D|
        query_rels: 该查询在全语料上的分级相关度 (长度 |D|)
        k: 截断，K <= |D|

    Raises:
        ContractError: |D| = 0、K < 1 或 K > |D|
    """
    if corpus_size <= 0:
        raise ContractError("random baseline of an empty corpus")
    if not 1 <= k <= corpus_size:
        raise ContractError(f"K must lie in [1, {corpus_size}], got {k}")
    rels = _as_rels(query_rels, "query_rels")
    relevant_count = int(np.sum(rels >= constants.RELEVANCE_THRESHOLD))
    mean_rel = float(rels.mean()) if rels.size else 0.0
    ideal = ideal_dcg_at_k(rels, k)
    ndcg = mean_rel * float(discounts(k).sum()) / ideal if ideal > 0 else 0.0
    return BaselineMetrics(ndcg=ndcg, precision=relevant_count / corpus_size, recall=k / corpus_size)
