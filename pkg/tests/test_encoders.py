"""
Encoder Unit Tests
==================

测试文本、视觉、位置编码器与 ClospModel
"""

import math

import numpy as np
import pytest

from core.errors import ContractError, DomainError, ShapeError, VocabularyError
from core.vocabulary import LABELS, Modality
from encoders import (
    ClospModel,
    EncoderConfig,
    LocationEncoder,
    TextEncoder,
    VisionEncoder,
    encode_image,
    encode_location,
    encode_text,
    sh_basis,
    sh_encode,
)
from ndmath import grad_check


TINY = EncoderConfig(embed_dim=4, image_side=8, sh_degree=1, siren_layers=1, siren_hidden=6, text_hidden=5)


# ============================================================================
# EncoderConfig 测试
# ============================================================================

class TestEncoderConfig:
    """测试编码器配置校验"""

    def test_sh_features(self):
        assert EncoderConfig(sh_degree=3).sh_features == 16

    def test_sh_features_must_fit_siren_width(self):
        with pytest.raises(ContractError):
            EncoderConfig(sh_degree=4, siren_hidden=16)

    def test_round_trip_dict(self):
        config = EncoderConfig(embed_dim=16, image_side=12)
        assert EncoderConfig.from_dict(config.to_dict()) == config


# ============================================================================
# TextEncoder 测试
# ============================================================================

class TestTextEncoder:
    """测试文本编码器"""

    def test_unit_norm_output(self, small_model):
        out = small_model.embed_texts([["trees"], ["water", "built"], list(LABELS)])
        assert out.shape == (3, small_model.embed_dim)
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0)

    def test_order_and_case_invariant(self, small_model):
        a = encode_text(["water", "trees"], small_model.text).data
        b = encode_text([" Trees", "WATER "], small_model.text).data
        assert np.array_equal(a, b)

    def test_pooling_rows_sum_to_one(self, small_model):
        pooling = small_model.text.pooling_matrix([["trees"], ["crops", "bare", "water"]])
        assert np.allclose(pooling.sum(axis=1), 1.0)

    def test_unknown_label(self, small_model):
        with pytest.raises(VocabularyError):
            encode_text(["lava"], small_model.text)

    def test_empty_label_set(self, small_model):
        with pytest.raises(ContractError):
            encode_text([], small_model.text)


# ============================================================================
# VisionEncoder 测试
# ============================================================================

class TestVisionEncoder:
    """测试视觉编码器"""

    def test_output_shape_and_norm(self, small_model, rng):
        images = rng.uniform(size=(3, 12, 16, 16))
        out = small_model.embed_images(images, Modality.MSI)
        assert out.shape == (3, small_model.embed_dim)
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0)

    def test_chunked_matches_single_pass(self, small_model, rng):
        images = rng.uniform(size=(5, 2, 16, 16))
        full = small_model.embed_images(images, Modality.SAR)
        chunked = small_model.embed_images(images, Modality.SAR, chunk=2)
        assert np.allclose(full, chunked)

    def test_wrong_channel_count(self, small_model, rng):
        with pytest.raises(ShapeError):
            small_model.vision[Modality.SAR].forward(rng.uniform(size=(1, 12, 16, 16)))

    def test_wrong_spatial_extent(self, small_model, rng):
        with pytest.raises(ShapeError):
            small_model.vision[Modality.MSI].forward(rng.uniform(size=(1, 12, 20, 20)))

    def test_modality_routing(self, small_model, rng):
        with pytest.raises(ShapeError):
            encode_image(rng.uniform(size=(2, 16, 16)), Modality.SAR, small_model.vision[Modality.MSI])
        vector = encode_image(rng.uniform(size=(2, 16, 16)), Modality.SAR, small_model.vision[Modality.SAR])
        assert vector.shape == (small_model.embed_dim,)

    def test_separate_parameters_per_modality(self, small_model):
        names = set(small_model.parameters())
        assert any(name.startswith("sar.") for name in names)
        assert any(name.startswith("msi.") for name in names)


# ============================================================================
# 位置编码测试
# ============================================================================

class TestSphericalHarmonics:
    """测试球谐编码"""

    def test_feature_count(self):
        assert sh_basis([0.0, 10.0], [0.0, 20.0], 3).shape == (2, 16)
        assert sh_encode(0.0, 0.0, 2).shape == (9,)

    def test_degree_zero_constant(self):
        value = sh_encode(123.0, -45.0, 0).data[0]
        assert value == pytest.approx(1.0 / math.sqrt(4.0 * math.pi))

    def test_y10_follows_latitude(self):
        lat = 30.0
        y10 = sh_encode(77.0, lat, 1).data[2]
        assert y10 == pytest.approx(math.sqrt(3.0 / (4.0 * math.pi)) * math.sin(math.radians(lat)))

    def test_pole_independent_of_longitude(self):
        a = sh_encode(-170.0, 90.0, 3).data
        b = sh_encode(45.0, 90.0, 3).data
        assert np.allclose(a, b)

    def test_orthonormal_on_sphere(self):
        # 余纬/经度中点求积
        n_theta, n_phi = 180, 360
        theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
        phi = (np.arange(n_phi) + 0.5) * 2.0 * math.pi / n_phi - math.pi
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        lat = 90.0 - np.degrees(tt.ravel())
        lon = np.degrees(pp.ravel())
        basis = sh_basis(lon, lat, 2)
        weights = np.sin(tt.ravel()) * (math.pi / n_theta) * (2.0 * math.pi / n_phi)
        gram = basis.T @ (basis * weights[:, None])
        assert np.allclose(gram, np.eye(9), atol=1e-3)

    @pytest.mark.parametrize("lon,lat", [(181.0, 0.0), (0.0, -90.5), (float("nan"), 0.0)])
    def test_out_of_range(self, lon, lat):
        with pytest.raises(DomainError):
            sh_encode(lon, lat, 2)


class TestLocationEncoder:
    """测试 SIREN 位置编码器"""

    def test_unit_norm(self, small_model):
        out = small_model.embed_locations([0.0, 100.0, -60.0], [0.0, 45.0, -30.0])
        assert out.shape == (3, small_model.embed_dim)
        assert np.allclose(np.linalg.norm(out, axis=1), 1.0)

    def test_single_point(self, small_model):
        assert encode_location(10.0, 20.0, small_model.location).shape == (small_model.embed_dim,)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_nearby_points_encode_nearby(self, small_encoder_config, seed):
        encoder = LocationEncoder(small_encoder_config, np.random.default_rng(seed))
        origin = encode_location(0.0, 0.0, encoder).data
        shifted = encode_location(0.001, 0.0, encoder).data
        assert 1.0 - float(origin @ shifted) <= 1e-3

    def test_siren_initialisation_bounds(self, small_encoder_config):
        encoder = LocationEncoder(small_encoder_config, np.random.default_rng(0))
        fan_in = small_encoder_config.sh_features
        weight, _ = encoder.layers[0]
        assert np.abs(weight.data).max() <= 1.0 / fan_in
        hidden = small_encoder_config.siren_hidden
        bound = math.sqrt(6.0 / hidden) / small_encoder_config.siren_omega0
        assert np.abs(encoder.layers[1][0].data).max() <= bound
        assert np.abs(encoder.out_w.data).max() <= bound

    def test_first_preactivations_bounded(self, small_encoder_config):
        encoder = LocationEncoder(small_encoder_config, np.random.default_rng(0))
        pre = encoder.first_preactivations(np.linspace(-180, 180, 50), np.linspace(-90, 90, 50))
        assert np.all(np.isfinite(pre))
        assert np.abs(pre).max() < small_encoder_config.siren_omega0 * 2.0


# ============================================================================
# 梯度校验
# ============================================================================

class TestEncoderGradients:
    """编码器参数的有限差分校验"""

    def test_text_encoder(self):
        encoder = TextEncoder(TINY, np.random.default_rng(1))
        probe = np.random.default_rng(2).normal(size=(2, TINY.embed_dim))
        params = list(encoder.parameters().values())
        error = grad_check(lambda p: (encoder.forward([["trees", "water"], ["bare"]]) * probe).sum(), params)
        assert error <= 1e-4

    def test_location_encoder(self):
        encoder = LocationEncoder(TINY, np.random.default_rng(1))
        probe = np.random.default_rng(2).normal(size=(3, TINY.embed_dim))
        params = list(encoder.parameters().values())
        error = grad_check(lambda p: (encoder.forward([10.0, -20.0, 150.0], [5.0, 40.0, -70.0]) * probe).sum(),
                           params)
        assert error <= 1e-4

    def test_vision_encoder(self):
        encoder = VisionEncoder(Modality.SAR, TINY, np.random.default_rng(1))
        images = np.random.default_rng(2).uniform(size=(2, 2, 8, 8))
        probe = np.random.default_rng(3).normal(size=(2, TINY.embed_dim))
        params = [encoder.parameters()[name] for name in ("sar.conv1.weight", "sar.conv1.bias",
                                                           "sar.head.weight", "sar.head.bias")]
        error = grad_check(lambda p: (encoder.forward(images) * probe).sum(), params)
        assert error <= 1e-4


# ============================================================================
# ClospModel 测试
# ============================================================================

class TestClospModel:
    """测试模型参数管理"""

    def test_state_round_trip(self, small_encoder_config, small_model):
        other = ClospModel(small_encoder_config, np.random.default_rng(99))
        other.load_state(small_model.state())
        assert np.array_equal(other.embed_texts([["trees"]]), small_model.embed_texts([["trees"]]))

    def test_state_mismatch(self, small_model):
        state = small_model.state()
        state.pop(next(iter(state)))
        with pytest.raises(ContractError):
            small_model.load_state(state)

    def test_same_seed_same_parameters(self, small_encoder_config):
        a = ClospModel(small_encoder_config, np.random.default_rng(5)).state()
        b = ClospModel(small_encoder_config, np.random.default_rng(5)).state()
        assert all(np.array_equal(a[name], b[name]) for name in a)

    def test_initial_temperature(self, small_model):
        assert small_model.temperature.tau == pytest.approx(0.07)
