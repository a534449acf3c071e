"""
Trainer Unit Tests
==================

测试 Adam、学习率调度、批次组成、训练配置与训练循环
"""

import math

import numpy as np
import pytest

from core.errors import ConfigError, ContractError, DataError, DimensionError, DomainError, NumericError
from core.vocabulary import Modality
from encoders.location import LocationEncoder
from ndmath import Tensor
from trainer import (
    AdamState,
    Trainer,
    TrainConfig,
    TrainingModalities,
    adam_step,
    compose_batch,
    lr_schedule,
    steps_per_epoch,
)


@pytest.fixture
def train_config(small_train_overrides):
    return TrainConfig(epochs=1, batch_size=8, seed=3, **small_train_overrides)


# ============================================================================
# Adam 测试
# ============================================================================

class TestAdam:
    """测试 Adam 更新"""

    def test_first_step_example(self):
        (theta,), state = adam_step([np.zeros(1)], [np.ones(1)], AdamState(), lr=0.1)
        assert theta[0] == pytest.approx(-0.1 / (1.0 + 1e-8), abs=1e-15)
        assert state.step == 1

    def test_first_step_is_sign_times_lr(self, rng):
        grads = rng.normal(size=5)
        (theta,), _ = adam_step([np.zeros(5)], [grads], AdamState(), lr=0.01)
        assert np.allclose(theta, -0.01 * np.sign(grads), atol=1e-9)

    def test_state_is_not_mutated(self):
        state = AdamState.fresh([np.zeros(2)])
        adam_step([np.zeros(2)], [np.ones(2)], state, lr=0.1)
        assert state.step == 0
        assert state.m[0].tolist() == [0.0, 0.0]

    def test_zero_lr_keeps_parameters(self):
        (theta,), _ = adam_step([np.full(3, 2.0)], [np.ones(3)], AdamState(), lr=0.0)
        assert theta.tolist() == [2.0, 2.0, 2.0]

    def test_negative_lr(self):
        with pytest.raises(DomainError):
            adam_step([np.zeros(1)], [np.ones(1)], AdamState(), lr=-0.1)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            adam_step([np.zeros(2)], [np.ones(3)], AdamState(), lr=0.1)
        with pytest.raises(DimensionError):
            adam_step([np.zeros(2)], [np.ones(2), np.ones(2)], AdamState(), lr=0.1)


# ============================================================================
# 学习率调度测试
# ============================================================================

class TestLrSchedule:
    """测试预热 + 余弦调度"""

    def test_warmup_is_linear(self):
        assert lr_schedule(0, 100, 10, 1e-3) == pytest.approx(1e-4)
        assert lr_schedule(9, 100, 10, 1e-3) == pytest.approx(1e-3)

    def test_cosine_after_warmup(self):
        assert lr_schedule(10, 100, 10, 1e-3) == pytest.approx(1e-3)
        assert lr_schedule(55, 100, 10, 1e-3) == pytest.approx(0.5e-3)
        assert lr_schedule(100, 100, 10, 1e-3) == pytest.approx(0.0, abs=1e-15)

    def test_no_warmup(self):
        assert lr_schedule(0, 4, 0, 2.0) == pytest.approx(2.0)
        assert lr_schedule(2, 4, 0, 2.0) == pytest.approx(2.0 * 0.5 * (1.0 + math.cos(math.pi / 2)))

    @pytest.mark.parametrize("total,warmup,max_lr", [(100, 10, 1e-3), (40, 3, 0.5), (7, 1, 2.0), (312, 15, 1e-4)])
    def test_continuous_at_warmup_boundary(self, total, warmup, max_lr):
        jump = abs(lr_schedule(warmup - 1, total, warmup, max_lr) - lr_schedule(warmup, total, warmup, max_lr))
        assert jump <= max_lr / warmup + 1e-15

    def test_non_increasing_after_warmup(self):
        values = [lr_schedule(s, 50, 5, 1.0) for s in range(5, 51)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("step,total,warmup,max_lr", [
        (-1, 10, 0, 1.0),
        (11, 10, 0, 1.0),
        (0, 10, 10, 1.0),
        (0, 10, 0, -1.0),
        (0, 0, 0, 1.0),
    ])
    def test_domain_errors(self, step, total, warmup, max_lr):
        with pytest.raises(DomainError):
            lr_schedule(step, total, warmup, max_lr)


# ============================================================================
# 批次组成测试
# ============================================================================

class TestBatching:
    """测试混合模态批次"""

    def test_joint_batch_is_balanced(self, small_corpus, rng):
        batch = compose_batch(small_corpus.items, 4, rng)
        assert len(batch) == 8
        modalities = [item.modality for item in batch.items]
        assert modalities.count(Modality.SAR) == modalities.count(Modality.MSI) == 4
        assert len({item.id for item in batch.items}) == 8

    def test_single_modality_batch(self, small_corpus, rng):
        batch = compose_batch(small_corpus.items, 4, rng, TrainingModalities.MSI)
        assert len(batch) == 8
        assert all(item.modality is Modality.MSI for item in batch.items)

    def test_grouped_keeps_modalities_together(self, small_corpus, rng):
        grouped = compose_batch(small_corpus.items, 3, rng).grouped()
        modalities = [item.modality for item in grouped.items]
        assert modalities == sorted(modalities, key=lambda m: list(Modality).index(m))
        assert {m: a.shape[0] for m, a in grouped.images().items()} == {Modality.SAR: 3, Modality.MSI: 3}

    def test_same_seed_same_batch(self, small_corpus):
        a = compose_batch(small_corpus.items, 4, np.random.default_rng(9))
        b = compose_batch(small_corpus.items, 4, np.random.default_rng(9))
        assert [i.id for i in a.items] == [i.id for i in b.items]

    def test_not_enough_items(self, small_corpus, rng):
        sar_only = small_corpus.of_modality(Modality.SAR)
        with pytest.raises(DataError):
            compose_batch(sar_only, 2, rng)
        with pytest.raises(DataError):
            compose_batch(sar_only[:3], 2, rng, TrainingModalities.SAR)

    def test_per_modality_domain(self, small_corpus, rng):
        with pytest.raises(ContractError):
            compose_batch(small_corpus.items, 0, rng)

    def test_steps_per_epoch_drops_partial_batch(self, small_corpus):
        assert steps_per_epoch(small_corpus.items, 16) == 120 // 16
        assert steps_per_epoch(small_corpus.items, 16, TrainingModalities.SAR) == 60 // 16
        with pytest.raises(DataError):
            steps_per_epoch(small_corpus.items[:5], 16)


# ============================================================================
# TrainConfig 测试
# ============================================================================

class TestTrainConfig:
    """测试训练配置"""

    def test_alpha_defaults(self):
        assert TrainConfig().alpha == 1.0
        assert TrainConfig(use_location=True).alpha == 0.5

    def test_alpha_zero_with_location_rejected(self):
        with pytest.raises(DomainError):
            TrainConfig(use_location=True, alpha=0.0)

    def test_alpha_without_location_must_be_one(self):
        with pytest.raises(DomainError):
            TrainConfig(alpha=0.5)

    @pytest.mark.parametrize("kwargs", [{"batch_size": 7}, {"epochs": 0}, {"modalities": "radar"}])
    def test_contract_violations(self, kwargs):
        with pytest.raises(ContractError):
            TrainConfig(**kwargs)

    def test_warmup_default_and_clamp(self):
        assert TrainConfig().resolved_warmup(200) == 10
        assert TrainConfig(warmup_steps=50).resolved_warmup(20) == 19

    def test_from_file_with_overrides(self, tmp_path):
        path = tmp_path / "train.yaml"
        path.write_text("epochs: 3\nbatch_size: 16\nalpha:\n", encoding="utf-8")
        config = TrainConfig.from_file(path, seed=5, use_location=True)
        assert (config.epochs, config.batch_size, config.seed, config.alpha) == (3, 16, 5, 0.5)

    def test_from_file_unknown_key(self, tmp_path):
        path = tmp_path / "train.yaml"
        path.write_text("epochs: 3\nlearning_rate: 0.1\n", encoding="utf-8")
        with pytest.raises(ConfigError) as exc_info:
            TrainConfig.from_file(path)
        assert exc_info.value.line == 2

    def test_from_file_bad_value(self, tmp_path):
        path = tmp_path / "train.yaml"
        path.write_text("use_location: true\nalpha: 0\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            TrainConfig.from_file(path)

    def test_round_trip_dict(self):
        config = TrainConfig(use_location=True, alpha=0.7, modalities="sar")
        assert TrainConfig.from_dict(config.to_dict()) == config


# ============================================================================
# 训练循环测试
# ============================================================================

class TestTrainer:
    """测试训练循环"""

    def test_step_count_and_trace(self, train_config, small_corpus):
        result = Trainer(train_config, small_corpus.items).run()
        assert result.step == 120 // 8
        assert len(result.trace) == 1
        assert np.isfinite(result.trace[0].mean_loss)
        assert result.trace[0].tau > 0

    def test_deterministic(self, train_config, small_corpus):
        a = Trainer(train_config, small_corpus.items).run().checkpoint.state
        b = Trainer(train_config, small_corpus.items).run().checkpoint.state
        assert all(np.array_equal(a[name], b[name]) for name in a)

    def test_updates_temperature(self, train_config, small_corpus):
        trainer = Trainer(train_config, small_corpus.items)
        trainer.step()
        assert trainer.model.temperature.tau != pytest.approx(0.07, abs=1e-12)

    def test_location_encoder_unused_without_location(self, train_config, small_corpus, monkeypatch):
        def forbidden(self, lon, lat):
            raise AssertionError("location encoder called")

        monkeypatch.setattr(LocationEncoder, "forward", forbidden)
        trainer = Trainer(train_config, small_corpus.items)
        before = {n: p.data.copy() for n, p in trainer.model.location.parameters().items()}
        trainer.step()
        after = trainer.model.location.parameters()
        assert all(np.array_equal(before[n], after[n].data) for n in before)

    def test_geo_training_uses_location(self, small_train_overrides, small_corpus):
        config = TrainConfig(epochs=1, batch_size=8, use_location=True, **small_train_overrides)
        trainer = Trainer(config, small_corpus.items)
        before = {n: p.data.copy() for n, p in trainer.model.location.parameters().items()}
        trainer.step()
        after = trainer.model.location.parameters()
        assert any(not np.array_equal(before[n], after[n].data) for n in before)

    def test_non_finite_loss(self, train_config, small_corpus, monkeypatch):
        monkeypatch.setattr(Trainer, "loss", lambda self, embeddings: Tensor(np.nan))
        trainer = Trainer(train_config, small_corpus.items)
        with pytest.raises(NumericError) as exc_info:
            trainer.step()
        assert exc_info.value.step == 0

    def test_image_side_mismatch(self, small_corpus):
        with pytest.raises(DataError):
            Trainer(TrainConfig(batch_size=8, image_side=32), small_corpus.items)

    def test_empty_training_set(self, train_config):
        with pytest.raises(DataError):
            Trainer(train_config, [])
