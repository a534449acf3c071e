"""
corpus
======

语料库数据模型、合成语料生成、CLC 标签协调、分层划分、查询枚举与分级相关度。
"""

from .clc_mapping import clc_classes, load_clc_mapping, map_clc_to_dw
from .data_model import Corpus, CorpusItem, Query, SplitResult, stack_images
from .generator import REGIONS, GeneratorConfig, Region, generate_synthetic_corpus
from .queries import enumerate_queries, graded_relevance, is_relevant, single_label_queries
from .split import label_proportions, stratified_split

__all__ = [
    "clc_classes",
    "load_clc_mapping",
    "map_clc_to_dw",
    "Corpus",
    "CorpusItem",
    "Query",
    "SplitResult",
    "stack_images",
    "REGIONS",
    "GeneratorConfig",
    "Region",
    "generate_synthetic_corpus",
    "enumerate_queries",
    "graded_relevance",
    "is_relevant",
    "single_label_queries",
    "label_proportions",
    "stratified_split",
]
