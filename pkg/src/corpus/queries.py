"""
Queries and Graded Relevance
============================

- enumerate_queries: 语料中每个样本标签集合的全部非空子集的并集 (去重)
- graded_relevance: rel = round(10 · IoU(L_q, L_i))，半数远离零取整
- is_relevant: rel >= 5
"""

from __future__ import annotations

from itertools import combinations
from typing import AbstractSet, Iterable, List, Set

from config import constants
from core.errors import ContractError, DomainError
from corpus.data_model import Query


def enumerate_queries(label_sets: Iterable[AbstractSet[str]]) -> List[Query]:
    """
    枚举语料中出现过的全部标签组合

    Args:
        label_sets: 每个样本的标签集合 (也可以直接传入 Corpus)

    Returns:
        去重后的查询列表，先按长度、再按词表顺序排序

    Raises:
        ContractError: 语料为空
    """
    seen: Set[frozenset] = set()
    count = 0
    for labels in label_sets:
        labels = getattr(labels, "labels", labels)
        count += 1
        members = sorted(labels)
        for size in range(1, len(members) + 1):
            for subset in combinations(members, size):
                seen.add(frozenset(subset))
    if count == 0:
        raise ContractError("cannot enumerate queries of an empty corpus")
    return sorted((Query(labels) for labels in seen), key=lambda query: query.sort_key)


def single_label_queries(queries: Iterable[Query]) -> List[Query]:
    return [query for query in queries if len(query) == 1]


def graded_relevance(query_labels: AbstractSet[str], item_labels: AbstractSet[str]) -> int:
    """
    分级相关度 0..10

    以整数运算实现 round-half-away-from-zero:
    floor((20·|∩| + |∪|) / (2·|∪|))

    Examples:
        >>> graded_relevance({"water", "trees"}, {"water"})
        5
        >>> graded_relevance({"trees", "crops", "water", "built"}, {"trees"})
        3

    Raises:
        ContractError: 任一集合为空
    """
    query_labels = getattr(query_labels, "labels", query_labels)
    if not query_labels or not item_labels:
        raise ContractError("graded relevance needs two non-empty label sets")
    inter = len(query_labels & item_labels)
    union = len(query_labels | item_labels)
    return (20 * inter + union) // (2 * union)


def is_relevant(rel: int) -> bool:
    """rel >= 5 视为相关"""
    if not 0 <= rel <= constants.MAX_RELEVANCE:
        raise DomainError(f"relevance must lie in [0, {constants.MAX_RELEVANCE}], got {rel}")
    return rel >= constants.RELEVANCE_THRESHOLD
