"""
Retrieval Evaluation
====================

evaluate_retrieval: 对每个查询用文本编码器得到查询向量，在索引 (或两个模态索引融合) 上
搜索，按分级相关度计算 nDCG / P / R (K ∈ {10, 50, 100, 1000})，并给出随机基线与
逐类 nDCG (每类取其单标签查询)。

支持三种索引范围: all / sar / msi。
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from config import constants
from core.errors import ContractError
from core.vocabulary import LABELS, Modality
from corpus.data_model import Query
from corpus.queries import graded_relevance
from encoders.model import ClospModel
from evalsuite.metrics import ndcg_at_k, precision_recall_at_k, random_baseline
from evalsuite.reporting import write_json, write_text
from retrieval.index import EmbeddingIndex, RankedList, fuse_rankings, search


METRICS = ("ndcg", "precision", "recall")


class Scope(Enum):
    """索引范围"""
    ALL = "all"
    SAR = "sar"
    MSI = "msi"

    @property
    def modality(self) -> Optional[Modality]:
        return None if self is Scope.ALL else Modality.from_string(self.value)

    @classmethod
    def from_string(cls, value: str, default: Optional["Scope"] = None) -> Optional["Scope"]:
        if not value:
            return default
        value_lower = value.strip().lower()
        for member in cls:
            if member.value == value_lower:
                return member
        return default


def metric_key(metric: str, k: int) -> str:
    return f"{metric}@{k}"


# ============================================================================
# 报告
# ============================================================================

@dataclass
class MetricsReport:
    """
    检索评估报告 (数值均在 [0, 1]，文本表格中以百分比显示)

    Attributes:
        scope: all / sar / msi / fused
        corpus_size: 被检索的记录数
        cutoffs: 截断 K
        mean: {指标@K: 平均值}
        baseline: {指标@K: 随机基线平均值}
        per_query: {查询文本: {指标@K: 值}}
        per_class: {标签: {ndcg@K: 值}}
    """
    scope: str
    corpus_size: int
    cutoffs: Tuple[int, ...]
    mean: Dict[str, float] = field(default_factory=dict)
    baseline: Dict[str, float] = field(default_factory=dict)
    per_query: Dict[str, Dict[str, float]] = field(default_factory=dict)
    per_class: Dict[str, Dict[str, float]] = field(default_factory=dict)

    @property
    def n_queries(self) -> int:
        return len(self.per_query)

    def to_flat_dict(self) -> Dict[str, Any]:
        """扁平 JSON 文档: 键形如 mean.ndcg@10、per_class.trees.ndcg@10"""
        flat: Dict[str, Any] = {
            "scope": self.scope,
            "counts.corpus": self.corpus_size,
            "counts.queries": self.n_queries,
        }
        for prefix, values in (("mean", self.mean), ("baseline", self.baseline)):
            flat.update({f"{prefix}.{key}": value for key, value in values.items()})
        for label, values in self.per_class.items():
            flat.update({f"per_class.{label}.{key}": value for key, value in values.items()})
        for query, values in self.per_query.items():
            flat.update({f"query.{query}.{key}": value for key, value in values.items()})
        return flat

    def summary_table(self) -> pd.DataFrame:
        rows = []
        for k in self.cutoffs:
            row = {"K": k}
            for metric in METRICS:
                row[metric] = 100.0 * self.mean.get(metric_key(metric, k), 0.0)
                row[f"random {metric}"] = 100.0 * self.baseline.get(metric_key(metric, k), 0.0)
            rows.append(row)
        return pd.DataFrame(rows)

    def class_table(self) -> pd.DataFrame:
        rows = [{"class": label, **{key: 100.0 * value for key, value in values.items()}}
                for label, values in self.per_class.items()]
        return pd.DataFrame(rows)

    def to_text(self) -> str:
        lines = [
            f"scope: {self.scope}  corpus: {self.corpus_size}  queries: {self.n_queries}",
            "",
            self.summary_table().to_string(index=False, float_format=lambda v: f"{v:.2f}"),
        ]
        if self.per_class:
            lines += ["", self.class_table().to_string(index=False, float_format=lambda v: f"{v:.2f}")]
        return "\n".join(lines) + "\n"

    def save(self, json_path: Union[str, Path], text_path: Optional[Union[str, Path]] = None) -> None:
        write_json(json_path, self.to_flat_dict())
        if text_path is not None:
            write_text(text_path, self.to_text())


# ============================================================================
# 评估
# ============================================================================

def _relevances(query: Query, labels: Sequence[FrozenSet[str]]) -> np.ndarray:
    return np.array([graded_relevance(query.labels, item_labels) for item_labels in labels], dtype=np.int64)


def score_ranking(ranked: RankedList, ids: np.ndarray, rels: np.ndarray,
                  cutoffs: Sequence[int]) -> Tuple[Dict[str, float], Dict[str, float]]:
    """
    对一个排序结果计算全部截断下的指标与随机基线

    Args:
        ranked: 检索结果
        ids: 被检索集合的 id
        rels: 与 ids 对齐的分级相关度
    """
    rel_of = dict(zip(ids.tolist(), rels.tolist()))
    retrieved_rels = [rel_of[i] for i in ranked.ids]
    relevant = ids[rels >= constants.RELEVANCE_THRESHOLD]
    metrics: Dict[str, float] = {}
    baseline: Dict[str, float] = {}
    for k in cutoffs:
        precision, recall = precision_recall_at_k(ranked.ids, relevant.tolist(), k)
        metrics[metric_key("ndcg", k)] = ndcg_at_k(retrieved_rels, rels, k)
        metrics[metric_key("precision", k)] = precision
        metrics[metric_key("recall", k)] = recall
        expected = random_baseline(len(ids), rels, min(k, len(ids)))
        baseline[metric_key("ndcg", k)] = expected.ndcg
        baseline[metric_key("precision", k)] = expected.precision
        baseline[metric_key("recall", k)] = expected.recall
    return metrics, baseline


def _as_model(model: Any) -> ClospModel:
    return model if isinstance(model, ClospModel) else model.build_model()


def evaluate_retrieval(model: Any, index: Union[EmbeddingIndex, Tuple[EmbeddingIndex, EmbeddingIndex]],
                       queries: Sequence[Query], scope: Scope = Scope.ALL,
                       cutoffs: Sequence[int] = constants.EVAL_CUTOFFS) -> MetricsReport:
    """
    评估检索效果

    Args:
        model: ClospModel / 检查点；融合模式下为 (SAR 模型, MSI 模型)
        index: 单个索引，或 (SAR 索引, MSI 索引) 用于融合
        queries: 查询集合
        scope: 单索引模式下的范围
        cutoffs: 截断

    Returns:
        MetricsReport

    Raises:
        ContractError: 查询为空或索引为空
    """
    if not queries:
        raise ContractError("no queries to evaluate")
    cutoffs = tuple(cutoffs)
    depth = max(cutoffs)
    single_label = [Query(frozenset([label])) for label in LABELS]

    if isinstance(index, tuple):
        models = tuple(_as_model(m) for m in model)
        indexes = index
        scope_name = "fused"
        ids = np.concatenate([ix.ids for ix in indexes])
        labels = [l for ix in indexes for l in ix.labels]

        def run(batch: Sequence[Query]) -> List[RankedList]:
            vectors = [m.embed_texts([q.labels for q in batch]) for m in models]
            return [fuse_rankings(search(indexes[0], vectors[0][i], depth),
                                  search(indexes[1], vectors[1][i], depth), depth)
                    for i in range(len(batch))]
    else:
        scoped = index.restrict(scope.modality)
        single = _as_model(model)
        scope_name = scope.value
        ids = scoped.ids
        labels = list(scoped.labels)

        def run(batch: Sequence[Query]) -> List[RankedList]:
            vectors = single.embed_texts([q.labels for q in batch])
            return [search(scoped, vectors[i], depth) for i in range(len(batch))]

    if len(ids) == 0:
        raise ContractError(f"index for scope {scope_name} is empty")

    report = MetricsReport(scope=scope_name, corpus_size=len(ids), cutoffs=cutoffs)
    sums: Dict[str, float] = {}
    baseline_sums: Dict[str, float] = {}
    for query, ranked in zip(queries, run(queries)):
        metrics, baseline = score_ranking(ranked, ids, _relevances(query, labels), cutoffs)
        report.per_query[query.render()] = metrics
        for key, value in metrics.items():
            sums[key] = sums.get(key, 0.0) + value
        for key, value in baseline.items():
            baseline_sums[key] = baseline_sums.get(key, 0.0) + value
    report.mean = {key: value / len(queries) for key, value in sums.items()}
    report.baseline = {key: value / len(queries) for key, value in baseline_sums.items()}

    for query, ranked in zip(single_label, run(single_label)):
        metrics, _ = score_ranking(ranked, ids, _relevances(query, labels), cutoffs)
        (label,) = query.labels
        report.per_class[label] = {key: value for key, value in metrics.items() if key.startswith("ndcg")}

    logger.info(
        f"Evaluated {len(queries)} queries on {scope_name} ({len(ids)} records): "
        + ", ".join(f"nDCG@{k}={report.mean[metric_key('ndcg', k)]:.4f}" for k in cutoffs)
    )
    return report
