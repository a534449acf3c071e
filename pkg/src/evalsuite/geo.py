"""
Spatial Probe
=============

检验嵌入空间是否保留地理结构:
从语料中无放回均匀抽取两个不相交的样本集 A、B (各 n 个)，按位置配对，
比较 Haversine 距离与嵌入余弦距离 (1 - cos) 的 Pearson / Spearman 相关。
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from scipy.stats import pearsonr, spearmanr

from config import constants
from core.errors import ContractError, DataError, DegenerateInputError, DomainError
from core.seeding import substream
from corpus.data_model import CorpusItem
from evalsuite.reporting import write_csv, write_json
from retrieval.index import EmbeddingIndex, index_corpus


def _check_range(lon: np.ndarray, lat: np.ndarray) -> None:
    if np.any(np.abs(lon) > 180.0) or np.any(np.abs(lat) > 90.0):
        raise DomainError("coordinates out of range: lon must lie in [-180, 180], lat in [-90, 90]")


def haversine_km(lon1: Any, lat1: Any, lon2: Any, lat2: Any) -> Union[float, np.ndarray]:
    """
    大圆距离 (km)，地球半径 6371.0

    标量输入返回 float，数组输入逐元素计算。

    Examples:
        >>> round(haversine_km(0, 0, 180, 0), 2)
        20015.09

    Raises:
        DomainError: 坐标越界
    """
    lon1, lat1, lon2, lat2 = (np.asarray(v, dtype=np.float64) for v in (lon1, lat1, lon2, lat2))
    _check_range(lon1, lat1)
    _check_range(lon2, lat2)
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlambda = np.radians(lon2 - lon1)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlambda / 2.0) ** 2
    distance = 2.0 * constants.EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))
    return float(distance) if distance.ndim == 0 else distance


def correlation(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float]:
    """
    (Pearson r, Spearman r_s)；Spearman 使用平均秩处理并列

    Raises:
        ContractError: 长度不同或少于 3
        DegenerateInputError: 任一序列为常数
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ContractError(f"correlation needs two 1-D series of equal length, got {x.shape} and {y.shape}")
    if x.size < 3:
        raise ContractError(f"correlation needs at least 3 points, got {x.size}")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateInputError("correlation of a constant series is undefined")
    pearson = pearsonr(x, y)[0]
    spearman = spearmanr(x, y)[0]
    return float(pearson), float(spearman)


@dataclass
class ProbeResult:
    """空间探针结果与逐对距离"""
    pearson: float
    spearman: float
    distances: pd.DataFrame

    def to_flat_dict(self) -> Dict[str, Any]:
        return {"pearson": self.pearson, "spearman": self.spearman, "pairs": int(len(self.distances))}

    def save(self, json_path: Union[str, Path], csv_path: Union[str, Path]) -> None:
        write_json(json_path, self.to_flat_dict())
        write_csv(csv_path, self.distances)


def spatial_probe(source: Any, items: Sequence[CorpusItem], n_pairs: int = constants.DEFAULT_PROBE_PAIRS,
                  seed: int = 0) -> ProbeResult:
    """
    空间相关探针

    Args:
        source: 已建好的 EmbeddingIndex，或用于建立索引的模型 / 检查点
        items: 语料样本 (source 为索引时只使用其 id)
        n_pairs: 每个集合的大小 n
        seed: 随机种子 ("probe" 子流)

    Raises:
        DataError: 样本数少于 2n
        DegenerateInputError: 距离序列为常数 (如全部嵌入相同)
    """
    if n_pairs < 1:
        raise ContractError(f"n_pairs must be >= 1, got {n_pairs}")
    if len(items) < 2 * n_pairs:
        raise DataError(f"spatial probe needs {2 * n_pairs} items, corpus has {len(items)}")
    index = source if isinstance(source, EmbeddingIndex) else index_corpus(source, items)
    row_of = {int(item_id): row for row, item_id in enumerate(index.ids)}
    ids = np.array(sorted(item.id for item in items), dtype=np.int64)
    missing = [int(i) for i in ids if int(i) not in row_of]
    if missing:
        raise DataError(f"index lacks {len(missing)} probe items, e.g. {missing[:3]}")

    rng = substream(seed, "probe")
    drawn = ids[rng.permutation(len(ids))[:2 * n_pairs]]
    rows_a = np.array([row_of[int(i)] for i in drawn[:n_pairs]])
    rows_b = np.array([row_of[int(i)] for i in drawn[n_pairs:]])

    km = haversine_km(index.lon[rows_a], index.lat[rows_a], index.lon[rows_b], index.lat[rows_b])
    cosine = 1.0 - np.einsum("ij,ij->i", index.vectors[rows_a], index.vectors[rows_b])
    pearson, spearman = correlation(km, cosine)
    distances = pd.DataFrame({"pair_id": np.arange(n_pairs), "km": km, "cosine_distance": cosine})
    logger.info(f"Spatial probe over {n_pairs} pairs: pearson={pearson:.4f}, spearman={spearman:.4f}")
    return ProbeResult(pearson, spearman, distances)
