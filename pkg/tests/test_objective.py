"""
Objective Unit Tests
====================

测试对称对比损失、GeoCLOSP 损失与可学习温度
"""

import math

import numpy as np
import pytest

from core.errors import ContractError, DimensionError, DomainError
from ndmath import Tensor, grad_check, l2_normalize
from ndmath.gradcheck import random_point
from objective import BatchEmbeddings, Temperature, contrastive_components, contrastive_loss, geo_loss
from objective.losses import anchored_cross_entropy


def unit_rows(rng, n, d):
    x = rng.normal(size=(n, d))
    return Tensor(x / np.linalg.norm(x, axis=1, keepdims=True))


# ============================================================================
# 闭式结果
# ============================================================================

class TestClosedForms:
    """已知解析值的损失"""

    def test_single_pair_is_zero(self, rng):
        v = unit_rows(rng, 1, 4)
        loss = contrastive_loss(BatchEmbeddings(img=v, txt=v), Temperature.fixed(0.07))
        assert loss.item() == 0.0

    def test_two_orthonormal_pairs(self):
        eye = Tensor(np.eye(2))
        loss = contrastive_loss(BatchEmbeddings(img=eye, txt=eye), Temperature.fixed(1.0))
        assert loss.item() == pytest.approx(math.log(1.0 + math.exp(-1.0)), abs=1e-9)

    @pytest.mark.parametrize("n", [2, 5, 16])
    def test_identical_embeddings_give_log_n(self, n):
        row = np.zeros((n, 3))
        row[:, 0] = 1.0
        same = Tensor(row)
        loss = contrastive_loss(BatchEmbeddings(img=same, txt=same), Temperature.fixed(0.3))
        assert loss.item() == pytest.approx(math.log(n), abs=1e-9)

    def test_geo_loss_alpha_one_equals_contrastive(self, rng):
        img, txt, loc = unit_rows(rng, 6, 5), unit_rows(rng, 6, 5), unit_rows(rng, 6, 5)
        temp = Temperature.fixed(0.5)
        geo = geo_loss(BatchEmbeddings(img=img, txt=txt, loc=loc), temp, alpha=1.0).item()
        plain = contrastive_loss(BatchEmbeddings(img=img, txt=txt), temp).item()
        assert geo == pytest.approx(plain, abs=1e-12)

    def test_geo_loss_alpha_zero_is_location_only(self, rng):
        img, txt, loc = unit_rows(rng, 4, 3), unit_rows(rng, 4, 3), unit_rows(rng, 4, 3)
        temp = Temperature.fixed(1.0)
        parts = contrastive_components(BatchEmbeddings(img=img, txt=txt, loc=loc), temp)
        geo = geo_loss(BatchEmbeddings(img=img, txt=txt, loc=loc), temp, alpha=0.0).item()
        assert geo == pytest.approx((parts["loc"].item() + parts["iloc"].item()) / 2.0, abs=1e-12)

    def test_random_init_loss_level(self):
        rng = np.random.default_rng(11)
        values = []
        for _ in range(20):
            batch = BatchEmbeddings(img=unit_rows(rng, 64, 32), txt=unit_rows(rng, 64, 32))
            values.append(contrastive_loss(batch, Temperature.fixed(1.0)).item())
        assert np.mean(values) == pytest.approx(math.log(64), rel=0.05)

    def test_loss_is_symmetric_in_modalities(self, rng):
        img, txt = unit_rows(rng, 5, 4), unit_rows(rng, 5, 4)
        temp = Temperature.fixed(0.2)
        forward = contrastive_loss(BatchEmbeddings(img=img, txt=txt), temp).item()
        swapped = contrastive_loss(BatchEmbeddings(img=txt, txt=img), temp).item()
        assert forward == pytest.approx(swapped, abs=1e-12)

    def test_loss_is_invariant_to_row_permutation(self, rng):
        img, txt, loc = unit_rows(rng, 7, 4), unit_rows(rng, 7, 4), unit_rows(rng, 7, 4)
        order = rng.permutation(7)
        shuffled = BatchEmbeddings(img=Tensor(img.data[order]), txt=Tensor(txt.data[order]), loc=Tensor(loc.data[order]))
        batch = BatchEmbeddings(img=img, txt=txt, loc=loc)
        temp = Temperature.fixed(0.2)
        assert contrastive_loss(shuffled, temp).item() == pytest.approx(contrastive_loss(batch, temp).item(), abs=1e-12)
        assert geo_loss(shuffled, temp, alpha=0.3).item() == pytest.approx(geo_loss(batch, temp, alpha=0.3).item(), abs=1e-12)


# ============================================================================
# 单调性
# ============================================================================

def similarity_batch(sims: np.ndarray) -> BatchEmbeddings:
    """
    构造图像-文本相似度矩阵恰为 sims 的批次

    图像取标准基 e_i，文本 j 的前 N 维为 sims[:, j]，最后一维补足单位范数。
    """
    n = sims.shape[0]
    img = np.hstack([np.eye(n), np.zeros((n, 1))])
    txt = np.hstack([sims.T, np.sqrt(1.0 - np.sum(sims.T ** 2, axis=1, keepdims=True))])
    return BatchEmbeddings(img=Tensor(img), txt=Tensor(txt))


class TestMonotonicity:
    """降低非对角相似度不会使损失上升"""

    @pytest.mark.parametrize("pair", [(0, 1), (2, 0), (3, 1)])
    def test_lowering_off_diagonal_similarity(self, pair):
        rng = np.random.default_rng(31)
        sims = rng.uniform(-0.4, 0.4, size=(4, 4))
        np.fill_diagonal(sims, 0.3)
        temp = Temperature.fixed(0.5)
        before = similarity_batch(sims)
        lowered = sims.copy()
        lowered[pair] -= 0.3
        after = similarity_batch(lowered)

        assert np.allclose(before.img.data @ before.txt.data.T, sims)
        assert contrastive_loss(after, temp).item() <= contrastive_loss(before, temp).item()
        assert (anchored_cross_entropy(after.img, after.txt, temp).item()
                <= anchored_cross_entropy(before.img, before.txt, temp).item())
        assert (anchored_cross_entropy(after.txt, after.img, temp).item()
                <= anchored_cross_entropy(before.txt, before.img, temp).item())


# ============================================================================
# 前置条件
# ============================================================================

class TestContracts:
    """测试输入校验"""

    def test_shape_mismatch(self, rng):
        with pytest.raises(ContractError):
            BatchEmbeddings(img=unit_rows(rng, 3, 4), txt=unit_rows(rng, 2, 4))

    def test_rows_must_be_unit_norm(self, rng):
        with pytest.raises(ContractError):
            BatchEmbeddings(img=Tensor(np.ones((2, 2))), txt=unit_rows(rng, 2, 2))

    def test_geo_loss_needs_locations(self, rng):
        batch = BatchEmbeddings(img=unit_rows(rng, 2, 3), txt=unit_rows(rng, 2, 3))
        with pytest.raises(ContractError):
            geo_loss(batch, Temperature())

    def test_empty_batch_rejected(self):
        with pytest.raises(DimensionError):
            BatchEmbeddings(img=Tensor(np.zeros((0, 4))), txt=Tensor(np.zeros((0, 4))))

    @pytest.mark.parametrize("alpha", [-0.1, 1.5])
    def test_alpha_domain(self, rng, alpha):
        batch = BatchEmbeddings(img=unit_rows(rng, 2, 3), txt=unit_rows(rng, 2, 3), loc=unit_rows(rng, 2, 3))
        with pytest.raises(DomainError):
            geo_loss(batch, Temperature(), alpha=alpha)


# ============================================================================
# 梯度
# ============================================================================

class TestGradients:
    """对全部参数组 (含 log τ) 做有限差分校验"""

    def test_contrastive_gradients(self):
        rng = np.random.default_rng(21)
        temp = Temperature(0.5)
        raw_img, raw_txt = random_point((4, 3), rng), random_point((4, 3), rng)

        def objective(params):
            batch = BatchEmbeddings(img=l2_normalize(params[0]), txt=l2_normalize(params[1]))
            return contrastive_loss(batch, temp)

        assert grad_check(objective, [raw_img, raw_txt, temp.log_tau]) <= 1e-4

    def test_geo_gradients(self):
        rng = np.random.default_rng(22)
        temp = Temperature(0.5)
        params = [random_point((4, 3), rng) for _ in range(3)]

        def objective(p):
            batch = BatchEmbeddings(img=l2_normalize(p[0]), txt=l2_normalize(p[1]), loc=l2_normalize(p[2]))
            return geo_loss(batch, temp, alpha=0.5)

        assert grad_check(objective, params + [temp.log_tau]) <= 1e-4

    def test_temperature_is_positive_and_learnable(self):
        temp = Temperature(0.07)
        assert temp.tau == pytest.approx(0.07)
        assert temp.inverse().item() == pytest.approx(1.0 / 0.07)
        assert list(temp.parameters()) == ["temperature.log_tau"]
