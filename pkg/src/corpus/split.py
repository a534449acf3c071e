"""
Stratified Multi-label Split
============================

迭代多标签分层划分 (iterative stratification):
反复取剩余样本中最稀有的标签，把其样本分配给该标签剩余需求最大的子集，
并列时比较子集的总剩余容量，再并列时由种子派生的随机数决定。
多标签样本可能让某一侧多出几个样本，此时逐个把使 χ² 最小的样本移到另一侧，直到两侧大小恰为目标值。

划分完成后对两个子集的逐标签计数做 χ² 检验。
"""

from __future__ import annotations

import numpy as np
from iterstrat.ml_stratifiers import MultilabelStratifiedShuffleSplit
from loguru import logger

from config import constants
from core.errors import DataError, DomainError
from core.seeding import substream
from core.vocabulary import LABELS
from corpus.data_model import Corpus, SplitResult
from evalsuite.statistics import chi_square_labels


def split_sizes(n_items: int, train_fraction: float) -> tuple:
    """训练集与检索集的目标大小，两个子集都至少有一个样本"""
    n_train = int(round(train_fraction * n_items))
    n_train = min(max(n_train, 1), n_items - 1)
    return n_train, n_items - n_train


def stratified_split(corpus: Corpus, train_fraction: float = constants.DEFAULT_TRAIN_FRACTION,
                     seed: int = 0) -> SplitResult:
    """
    划分训练集与检索集

    Args:
        corpus: 语料库
        train_fraction: 训练集比例, (0, 1)
        seed: 随机种子 (使用 "split" 子流)

    Returns:
        SplitResult，两个 id 集合按升序排列

    Raises:
        DomainError: train_fraction 不在 (0, 1)
        DataError: 样本数少于 2
    """
    if not 0.0 < train_fraction < 1.0:
        raise DomainError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    if len(corpus) < 2:
        raise DataError(f"stratified split needs at least 2 items, got {len(corpus)}")

    labels = corpus.label_matrix()
    n_train, n_retrieval = split_sizes(len(corpus), train_fraction)
    random_state = int(substream(seed, "split").integers(0, 2**31 - 1))
    splitter = MultilabelStratifiedShuffleSplit(
        n_splits=1,
        train_size=n_train,
        test_size=n_retrieval,
        random_state=random_state,
    )
    train_rows, _ = next(splitter.split(np.zeros((len(corpus), 1)), labels))
    train_rows, retrieval_rows = _rebalance(train_rows, labels, n_train)

    ids = np.asarray(corpus.ids)
    train_ids = tuple(sorted(int(i) for i in ids[train_rows]))
    retrieval_ids = tuple(sorted(int(i) for i in ids[retrieval_rows]))
    statistic, p_value = chi_square_labels(
        labels[train_rows].sum(axis=0),
        labels[retrieval_rows].sum(axis=0),
    )
    logger.info(
        f"Stratified split: {len(train_ids)} train / {len(retrieval_ids)} retrieval, "
        f"chi2={statistic:.4f}, p={p_value:.4f}"
    )
    return SplitResult(train_ids, retrieval_ids, float(statistic), float(p_value))


def _statistic_after_move(labels: np.ndarray, in_train: np.ndarray, row: int) -> float:
    moved = in_train.copy()
    moved[row] = not moved[row]
    return chi_square_labels(labels[moved].sum(axis=0), labels[~moved].sum(axis=0))[0]


def _rebalance(train_rows: np.ndarray, labels: np.ndarray, n_train: int) -> tuple:
    """把较大一侧的样本逐个移到另一侧，直到训练集恰有 n_train 个样本"""
    in_train = np.zeros(len(labels), dtype=bool)
    in_train[train_rows] = True
    moved = 0
    while int(in_train.sum()) != n_train:
        source = in_train if in_train.sum() > n_train else ~in_train
        row = min(np.flatnonzero(source), key=lambda r: (_statistic_after_move(labels, in_train, r), r))
        in_train[row] = not in_train[row]
        moved += 1
    if moved:
        logger.debug(f"Rebalanced split sizes by moving {moved} items")
    return np.flatnonzero(in_train), np.flatnonzero(~in_train)


def label_proportions(corpus: Corpus, split: SplitResult) -> dict:
    """每个标签进入训练集的比例 (仅统计出现过的标签)"""
    train = set(split.train_ids)
    proportions = {}
    matrix = corpus.label_matrix()
    in_train = np.array([item_id in train for item_id in corpus.ids])
    for column, label in enumerate(LABELS):
        total = int(matrix[:, column].sum())
        if total:
            proportions[label] = float(matrix[in_train, column].sum()) / total
    return proportions
