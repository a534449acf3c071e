"""
Zero-shot Multi-label Classification
====================================

- zero_shot_classify: 相似度矩阵 S[i][j] = u_i · v_j (v_j 为单个类别关键词的文本嵌入)，
  阈值 t 取整个矩阵的均值，S[i][j] > t (严格) 时预测类别 j
- macro_prf: 12 个类别上的宏平均 P / R / F1，0/0 记为 0
- dummy_classifier: 对每个样本都预测最常见的 k 个类别
- label_distribution: 每个标签的样本数与占比
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from sklearn.metrics import precision_recall_fscore_support
from sklearn.preprocessing import MultiLabelBinarizer

from core.errors import ContractError
from core.vocabulary import LABELS, VOCABULARY, Modality
from corpus.data_model import CorpusItem, stack_images
from encoders.model import ClospModel
from evalsuite.reporting import write_json, write_text

Predictions = Mapping[int, FrozenSet[str]]


@dataclass(frozen=True)
class SimilarityMatrix:
    """|D|×12 余弦相似度矩阵，行顺序与 ids 一致"""
    ids: Tuple[int, ...]
    scores: np.ndarray

    def __post_init__(self):
        if self.scores.shape != (len(self.ids), len(LABELS)):
            raise ContractError(f"similarity matrix must be {len(self.ids)}×{len(LABELS)}, got {self.scores.shape}")

    @property
    def threshold(self) -> float:
        """全部 |D|·12 个分数的均值"""
        return float(self.scores.mean())

    def predict(self) -> Dict[int, FrozenSet[str]]:
        mask = self.scores > self.threshold
        return {item_id: frozenset(LABELS[j] for j in np.flatnonzero(row)) for item_id, row in zip(self.ids, mask)}


def similarity_matrix(model: Any, items: Sequence[CorpusItem]) -> SimilarityMatrix:
    """每个样本的图像嵌入与 12 个类别关键词嵌入的内积"""
    if not items:
        raise ContractError("zero-shot classification of an empty corpus")
    model = model if isinstance(model, ClospModel) else model.build_model()
    class_vectors = model.embed_texts([[label] for label in LABELS])
    ordered = sorted(items, key=lambda item: item.id)
    rows: Dict[int, np.ndarray] = {}
    for modality in Modality:
        members = [item for item in ordered if item.modality is modality]
        if members:
            embedded = model.embed_images(stack_images(members), modality)
            rows.update({item.id: vector for item, vector in zip(members, embedded)})
    ids = tuple(item.id for item in ordered)
    image_vectors = np.stack([rows[i] for i in ids])
    return SimilarityMatrix(ids, image_vectors @ class_vectors.T)


def zero_shot_classify(model: Any, items: Sequence[CorpusItem]) -> Tuple[Dict[int, FrozenSet[str]], SimilarityMatrix]:
    """
    零样本多标签分类

    Returns:
        (每个样本的预测标签集合, 相似度矩阵)

    Raises:
        ContractError: 样本为空
    """
    matrix = similarity_matrix(model, items)
    predictions = matrix.predict()
    logger.info(f"Zero-shot classified {len(items)} items, threshold t={matrix.threshold:.6f}")
    return predictions, matrix


# ============================================================================
# 指标
# ============================================================================

@dataclass
class ClassificationReport:
    """宏平均 P / R / F1 与逐类指标"""
    precision: float
    recall: float
    f1: float
    per_class: Dict[str, Dict[str, float]] = field(default_factory=dict)
    threshold: Optional[float] = None
    baseline: Optional["ClassificationReport"] = None

    def to_flat_dict(self) -> Dict[str, Any]:
        flat: Dict[str, Any] = {"macro.precision": self.precision, "macro.recall": self.recall, "macro.f1": self.f1}
        if self.threshold is not None:
            flat["threshold"] = self.threshold
        for label, values in self.per_class.items():
            flat.update({f"per_class.{label}.{key}": value for key, value in values.items()})
        if self.baseline is not None:
            flat.update({f"dummy.macro.{key}": getattr(self.baseline, key) for key in ("precision", "recall", "f1")})
        return flat

    def table(self) -> pd.DataFrame:
        rows = [{"class": label, **{k: 100.0 * v for k, v in values.items()}} for label, values in self.per_class.items()]
        rows.append({"class": "macro", "precision": 100.0 * self.precision,
                     "recall": 100.0 * self.recall, "f1": 100.0 * self.f1})
        if self.baseline is not None:
            rows.append({"class": "dummy (2 most frequent)", "precision": 100.0 * self.baseline.precision,
                         "recall": 100.0 * self.baseline.recall, "f1": 100.0 * self.baseline.f1})
        return pd.DataFrame(rows)

    def to_text(self) -> str:
        return self.table().to_string(index=False, float_format=lambda v: f"{v:.2f}") + "\n"

    def save(self, json_path: Union[str, Path], text_path: Optional[Union[str, Path]] = None) -> None:
        write_json(json_path, self.to_flat_dict())
        if text_path is not None:
            write_text(text_path, self.to_text())


def _binarize(predictions: Predictions, truth: Predictions) -> Tuple[np.ndarray, np.ndarray]:
    if set(predictions) != set(truth):
        raise ContractError("predictions and truth must cover the same item ids")
    ids = sorted(truth)
    binarizer = MultiLabelBinarizer(classes=list(LABELS))
    y_true = binarizer.fit_transform([VOCABULARY.sorted(truth[i]) for i in ids])
    y_pred = binarizer.transform([VOCABULARY.sorted(predictions[i]) for i in ids])
    return y_true, y_pred


def macro_prf(predictions: Predictions, truth: Predictions) -> ClassificationReport:
    """
    宏平均 P / R / F1

    Raises:
        ContractError: 两者的样本 id 不一致
        VocabularyError: 出现未知类别
    """
    y_true, y_pred = _binarize(predictions, truth)
    precision, recall, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, labels=list(range(len(LABELS))), average=None, zero_division=0
    )
    per_class = {
        label: {"precision": float(precision[j]), "recall": float(recall[j]), "f1": float(f1[j])}
        for j, label in enumerate(LABELS)
    }
    return ClassificationReport(
        precision=float(np.mean(precision)),
        recall=float(np.mean(recall)),
        f1=float(np.mean(f1)),
        per_class=per_class,
    )


def label_distribution(label_sets: Iterable[Iterable[str]]) -> pd.DataFrame:
    """
    标签分布表: 每个标签的样本数与占样本总数的百分比 (词表顺序)
    """
    label_sets = [getattr(labels, "labels", labels) for labels in label_sets]
    counts = Counter(VOCABULARY.normalize(label) for labels in label_sets for label in labels)
    total = len(label_sets)
    return pd.DataFrame({
        "label": list(LABELS),
        "count": [int(counts.get(label, 0)) for label in LABELS],
        "percent": [100.0 * counts.get(label, 0) / total if total else 0.0 for label in LABELS],
    })


def dummy_classifier(truth: Predictions, k: int = 2) -> Dict[int, FrozenSet[str]]:
    """对每个样本预测最常见的 k 个类别，计数并列时按词表顺序"""
    if k < 1:
        raise ContractError(f"k must be >= 1, got {k}")
    distribution = label_distribution(truth.values())
    top = distribution.sort_values("count", ascending=False, kind="stable").head(k)["label"]
    predicted = frozenset(top)
    return {item_id: predicted for item_id in truth}
