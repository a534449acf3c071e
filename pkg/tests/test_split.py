"""
Split Unit Tests
================

测试多标签分层划分与 χ² 齐性检验
"""

import numpy as np
import pytest
from scipy.stats import chi2, chi2_contingency

from core.errors import ContractError, DataError, DomainError
from core.vocabulary import Modality
from corpus import Corpus, CorpusItem, GeneratorConfig, generate_synthetic_corpus, label_proportions, stratified_split
from corpus.split import split_sizes
from evalsuite.statistics import CHI2_DOF, chi_square_labels


@pytest.fixture(scope="module")
def split_corpus():
    """800 个样本的语料，足够检验分布相似度"""
    return generate_synthetic_corpus(GeneratorConfig(n_sar=400, n_msi=400, image_side=8, seed=11))


# ============================================================================
# 划分测试
# ============================================================================

class TestStratifiedSplit:
    """测试分层划分"""

    def test_sizes(self):
        assert split_sizes(100, 0.2) == (20, 80)
        assert split_sizes(3, 0.01) == (1, 2)
        assert split_sizes(3, 0.99) == (2, 1)

    def test_disjoint_and_complete(self, small_corpus):
        split = stratified_split(small_corpus, 0.2, seed=0)
        assert set(split.train_ids).isdisjoint(split.retrieval_ids)
        assert sorted(split.train_ids + split.retrieval_ids) == small_corpus.ids
        assert (len(split.train_ids), len(split.retrieval_ids)) == split_sizes(len(small_corpus), 0.2)

    def test_single_label_corpus_exact_sizes(self):
        items = [
            CorpusItem(id=i, modality=Modality.SAR, image=np.zeros((2, 4, 4)), labels=frozenset({"trees"}),
                       lon=0.0, lat=0.0)
            for i in range(100)
        ]
        split = stratified_split(Corpus(items), 0.2, seed=3)
        assert (len(split.train_ids), len(split.retrieval_ids)) == (20, 80)

    @pytest.mark.parametrize("fraction", [0.1, 0.2, 0.35, 0.5])
    def test_multi_label_sizes_exact(self, split_corpus, fraction):
        split = stratified_split(split_corpus, fraction, seed=2)
        assert (len(split.train_ids), len(split.retrieval_ids)) == split_sizes(len(split_corpus), fraction)

    def test_ids_sorted(self, small_corpus):
        split = stratified_split(small_corpus, 0.2, seed=0)
        assert list(split.train_ids) == sorted(split.train_ids)
        assert list(split.retrieval_ids) == sorted(split.retrieval_ids)

    def test_deterministic(self, small_corpus):
        assert stratified_split(small_corpus, 0.3, seed=4) == stratified_split(small_corpus, 0.3, seed=4)

    def test_label_distributions_similar(self, split_corpus):
        split = stratified_split(split_corpus, 0.2, seed=0)
        assert split.p_value >= 0.95
        for label, share in label_proportions(split_corpus, split).items():
            assert abs(share - 0.2) <= 0.05, label

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.5])
    def test_fraction_domain(self, small_corpus, fraction):
        with pytest.raises(DomainError):
            stratified_split(small_corpus, fraction)

    def test_too_small(self, small_corpus):
        with pytest.raises(DataError):
            stratified_split(Corpus(small_corpus.items[:1]), 0.5)

    def test_split_dict_round_trip(self, small_corpus):
        split = stratified_split(small_corpus, 0.2, seed=1)
        assert type(split).from_dict(split.to_dict()) == split


# ============================================================================
# χ² 测试
# ============================================================================

class TestChiSquare:
    """测试 2×12 列联表的 χ² 检验"""

    def test_identical_proportions(self):
        counts = [10, 20, 5, 0, 7, 3, 1, 2, 9, 4, 6, 8]
        statistic, p_value = chi_square_labels(counts, [2 * c for c in counts])
        assert statistic == pytest.approx(0.0)
        assert p_value == pytest.approx(1.0)

    def test_matches_scipy_on_full_table(self):
        a = np.array([12, 30, 8, 14, 22, 5, 9, 11, 3, 6, 7, 10])
        b = np.array([40, 95, 30, 60, 70, 25, 30, 40, 10, 20, 25, 41])
        statistic, p_value = chi_square_labels(a, b)
        expected_stat, expected_p, dof, _ = chi2_contingency(np.stack([a, b]), correction=False)
        assert dof == CHI2_DOF
        assert statistic == pytest.approx(expected_stat)
        assert p_value == pytest.approx(expected_p)

    def test_zero_columns_skipped(self):
        a = [5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 5]
        b = [10, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 10]
        statistic, _ = chi_square_labels(a, b)
        assert np.isfinite(statistic)
        assert statistic == pytest.approx(0.0)

    def test_dof_fixed_when_columns_dropped(self):
        a = [5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 3, 9]
        b = [12, 0, 0, 0, 0, 0, 0, 0, 0, 0, 10, 4]
        statistic, p_value = chi_square_labels(a, b)
        assert p_value == pytest.approx(chi2.sf(statistic, CHI2_DOF))
        assert p_value != pytest.approx(chi2.sf(statistic, 2))

    def test_wrong_length(self):
        with pytest.raises(ContractError):
            chi_square_labels([1, 2], [3, 4])

    def test_empty_side(self):
        with pytest.raises(ContractError):
            chi_square_labels([0] * 12, [1] * 12)
