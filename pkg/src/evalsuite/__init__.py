"""
evalsuite
=========

分级相关度检索指标与随机基线、零样本多标签分类、空间相关探针与标签分布统计。
"""

from .classification import (
    ClassificationReport,
    SimilarityMatrix,
    dummy_classifier,
    label_distribution,
    macro_prf,
    similarity_matrix,
    zero_shot_classify,
)
from .evaluate import MetricsReport, Scope, evaluate_retrieval, metric_key, score_ranking
from .geo import ProbeResult, correlation, haversine_km, spatial_probe
from .metrics import BaselineMetrics, dcg_at_k, ndcg_at_k, precision_recall_at_k, random_baseline
from .reporting import write_csv, write_json, write_text
from .statistics import chi_square_labels

__all__ = [
    "ClassificationReport",
    "SimilarityMatrix",
    "dummy_classifier",
    "label_distribution",
    "macro_prf",
    "similarity_matrix",
    "zero_shot_classify",
    "MetricsReport",
    "Scope",
    "evaluate_retrieval",
    "metric_key",
    "score_ranking",
    "ProbeResult",
    "correlation",
    "haversine_km",
    "spatial_probe",
    "BaselineMetrics",
    "dcg_at_k",
    "ndcg_at_k",
    "precision_recall_at_k",
    "random_baseline",
    "write_csv",
    "write_json",
    "write_text",
    "chi_square_labels",
]
