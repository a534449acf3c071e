"""
Retrieval Unit Tests
====================

测试嵌入索引、精确 top-K 搜索与双索引融合
"""

import numpy as np
import pytest

from core.errors import ContractError, DataError
from core.vocabulary import Modality
from retrieval import (
    EmbeddingIndex,
    EmbeddingRecord,
    RankedList,
    check_disjoint,
    fuse_rankings,
    index_corpus,
    min_max,
    search,
    search_fused,
)


def random_index(rng, n, d=6, start=0, modality=Modality.SAR):
    vectors = rng.normal(size=(n, d))
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    records = [EmbeddingRecord(start + i, modality, vectors[i], 0.0, 0.0, frozenset({"water"}))
               for i in range(n)]
    return EmbeddingIndex.from_records(records, d)


def unit(rng, d=6):
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


# ============================================================================
# 索引测试
# ============================================================================

class TestEmbeddingIndex:
    """测试索引构建与校验"""

    def test_index_corpus_sorted_and_unit(self, small_model, small_corpus):
        items = list(reversed(small_corpus.items[:20]))
        index = index_corpus(small_model, items)
        assert index.ids.tolist() == sorted(item.id for item in items)
        assert np.allclose(np.linalg.norm(index.vectors, axis=1), 1.0)
        assert index.provenance["embed_dim"] == small_model.embed_dim

    def test_index_matches_model_embeddings(self, small_model, small_corpus):
        item = small_corpus.of_modality(Modality.MSI)[0]
        index = index_corpus(small_model, [item])
        expected = small_model.embed_images(item.image[None], Modality.MSI)[0]
        assert np.allclose(index.vectors[0], expected)

    def test_read_only(self, rng):
        index = random_index(rng, 3)
        with pytest.raises(ValueError):
            index.vectors[0, 0] = 1.0

    def test_duplicate_ids(self, rng):
        index = random_index(rng, 2)
        records = index.records()
        with pytest.raises(ContractError):
            EmbeddingIndex.from_records([records[0], records[0]], 6)

    def test_non_unit_vectors(self):
        with pytest.raises(ContractError):
            EmbeddingIndex([1], [Modality.SAR], np.ones((1, 3)), [0.0], [0.0], [frozenset()])

    def test_restrict(self, rng):
        sar = random_index(rng, 3)
        msi = random_index(rng, 2, start=10, modality=Modality.MSI)
        both = EmbeddingIndex.from_records(sar.records() + msi.records(), 6)
        assert both.restrict(Modality.MSI).ids.tolist() == [10, 11]
        assert both.restrict(None) is both

    def test_labels_of(self, rng):
        assert random_index(rng, 2).labels_of() == {0: frozenset({"water"}), 1: frozenset({"water"})}


# ============================================================================
# 搜索测试
# ============================================================================

class TestSearch:
    """测试精确搜索"""

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            size = int(rng.integers(1, 101))
            k = int(rng.integers(1, size + 1))
            index = random_index(rng, size)
            query = unit(rng)
            result = search(index, query, k)
            scores = [float(np.dot(index.vectors[i], query)) for i in range(size)]
            expected = sorted(range(size), key=lambda i: (-scores[i], i))[:k]
            assert list(result.ids) == expected
            assert np.allclose(result.scores, [scores[i] for i in expected])

    def test_k_larger_than_index(self, rng):
        assert len(search(random_index(rng, 4), unit(rng), 1000)) == 4

    def test_ties_broken_by_id(self):
        vectors = np.tile([1.0, 0.0], (3, 1))
        index = EmbeddingIndex([7, 3, 5], [Modality.SAR] * 3, vectors, [0.0] * 3, [0.0] * 3, [frozenset()] * 3)
        assert search(index, np.array([1.0, 0.0]), 3).ids == (3, 5, 7)

    def test_empty_index(self, rng):
        empty = EmbeddingIndex.from_records([], 6)
        assert len(search(empty, unit(rng), 5)) == 0

    def test_query_must_be_unit(self, rng):
        with pytest.raises(ContractError):
            search(random_index(rng, 3), np.ones(6), 2)

    def test_query_dimension(self, rng):
        with pytest.raises(ContractError):
            search(random_index(rng, 3), unit(rng, 4), 2)

    def test_k_domain(self, rng):
        with pytest.raises(ContractError):
            search(random_index(rng, 3), unit(rng), 0)

    def test_ranked_list_iteration(self):
        ranked = RankedList((4, 2), (0.9, 0.1))
        assert list(ranked) == [(4, 0.9), (2, 0.1)]
        assert ranked.top(1).ids == (4,)


# ============================================================================
# 融合测试
# ============================================================================

class TestFusion:
    """测试 min-max 融合"""

    def test_min_max(self):
        assert min_max([2.0, 4.0, 3.0]).tolist() == [0.0, 1.0, 0.5]
        assert min_max([0.3, 0.3]).tolist() == [1.0, 1.0]
        assert min_max([0.7]).tolist() == [1.0]

    def test_fuse_normalises_each_list(self):
        a = RankedList((1, 2, 3), (0.9, 0.5, 0.1))
        b = RankedList((10, 11), (0.2, 0.1))
        fused = fuse_rankings(a, b, 5)
        assert fused.ids == (1, 10, 2, 3, 11)
        assert fused.scores == pytest.approx((1.0, 1.0, 0.5, 0.0, 0.0))

    def test_fuse_truncates(self):
        a = RankedList((1, 2), (0.9, 0.5))
        b = RankedList((10, 11), (0.2, 0.1))
        assert len(fuse_rankings(a, b, 3)) == 3

    def test_fuse_overlapping_ids(self):
        with pytest.raises(ContractError):
            fuse_rankings(RankedList((1,), (0.5,)), RankedList((1,), (0.4,)), 2)

    def test_search_fused(self, rng):
        sar = random_index(rng, 5)
        msi = random_index(rng, 5, start=100, modality=Modality.MSI)
        fused = search_fused(sar, unit(rng), msi, unit(rng), 4)
        assert len(fused) == 4
        assert fused.scores[0] == pytest.approx(1.0)
        assert set(fused.ids) & set(range(5)) and set(fused.ids) & set(range(100, 105))

    def test_check_disjoint(self, rng):
        a = random_index(rng, 3)
        check_disjoint(a, random_index(rng, 3, start=3))
        with pytest.raises(DataError):
            check_disjoint(a, random_index(rng, 3, start=2))
