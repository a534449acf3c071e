"""
Label distribution statistics: two-sample χ² on per-label counts.
"""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np
from scipy.stats import chi2

from core.errors import ContractError
from core.vocabulary import LABELS

# 自由度固定为 (2-1)·(12-1)，与实际出现的标签列数无关
CHI2_DOF = len(LABELS) - 1


def chi_square_labels(counts_a: Sequence[int], counts_b: Sequence[int]) -> Tuple[float, float]:
    """
    两个子集逐标签计数的 χ² 齐性检验

    在 2×12 列联表上计算 Σ (O-E)²/E，两侧计数都为 0 的标签列不参与求和。
    p 值始终取 CHI2_DOF = 11 个自由度的 χ² 生存函数，剔除全零列后自由度也不减少。

    Raises:
        ContractError: 长度不是 12、含负数或任一侧总数为 0
    """
    a = np.asarray(counts_a, dtype=np.float64)
    b = np.asarray(counts_b, dtype=np.float64)
    if a.shape != (len(LABELS),) or b.shape != (len(LABELS),):
        raise ContractError(f"expected {len(LABELS)} label counts per side, got {a.shape} and {b.shape}")
    if np.any(a < 0) or np.any(b < 0):
        raise ContractError("label counts must be non-negative")
    if a.sum() == 0 or b.sum() == 0:
        raise ContractError("chi-square needs positive totals on both sides")

    table = np.stack([a, b])
    table = table[:, table.sum(axis=0) > 0]
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / table.sum()
    statistic = float(((table - expected) ** 2 / expected).sum())
    return statistic, float(chi2.sf(statistic, CHI2_DOF))
