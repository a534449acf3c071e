"""
retrieval
=========

嵌入索引、精确 top-K 内积搜索与双索引分数融合。
"""

from .index import (
    EmbeddingIndex,
    EmbeddingRecord,
    RankedList,
    check_disjoint,
    fuse_rankings,
    index_corpus,
    min_max,
    rank_order,
    search,
    search_fused,
)

__all__ = [
    "EmbeddingIndex",
    "EmbeddingRecord",
    "RankedList",
    "check_disjoint",
    "fuse_rankings",
    "index_corpus",
    "min_max",
    "rank_order",
    "search",
    "search_fused",
]
