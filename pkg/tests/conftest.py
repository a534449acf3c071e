"""
Pytest 配置和共享 fixtures
===========================

提供测试中使用的共享配置和 fixtures: 小规模合成语料、小模型与训练配置。
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加项目源代码路径到 sys.path
project_root = Path(__file__).parent.parent
src_path = project_root / "src"
sys.path.insert(0, str(src_path))

from loguru import logger

from corpus.generator import GeneratorConfig, generate_synthetic_corpus
from encoders.config import EncoderConfig
from encoders.model import ClospModel


SMALL_SIDE = 16


# ============================================================================
# Pytest 配置钩子
# ============================================================================

def pytest_collection_modifyitems(config, items):
    """修改测试项"""
    # 自动标记测试
    for item in items:
        # 如果测试在 test_integration_*.py 文件中，标记为 integration
        if "integration" in item.nodeid:
            item.add_marker(pytest.mark.integration)
        # 默认标记为 unit
        elif not list(item.iter_markers(name="integration")):
            item.add_marker(pytest.mark.unit)


# ============================================================================
# 会话级 Fixtures
# ============================================================================

@pytest.fixture(scope="session")
def small_generator_config():
    """120 个样本、16×16 图像的生成配置"""
    return GeneratorConfig(n_sar=60, n_msi=60, image_side=SMALL_SIDE, seed=7)


@pytest.fixture(scope="session")
def small_corpus(small_generator_config):
    """小规模合成语料"""
    return generate_synthetic_corpus(small_generator_config)


@pytest.fixture(scope="session")
def small_encoder_config():
    return EncoderConfig(embed_dim=8, image_side=SMALL_SIDE, sh_degree=2,
                         siren_layers=2, siren_hidden=16, text_hidden=16)


@pytest.fixture(scope="session")
def small_train_overrides():
    """与 small_encoder_config 一致的 TrainConfig 结构字段"""
    return {
        "embed_dim": 8,
        "image_side": SMALL_SIDE,
        "sh_degree": 2,
        "siren_layers": 2,
        "siren_hidden": 16,
        "text_hidden": 16,
    }


# ============================================================================
# 函数级 Fixtures
# ============================================================================

@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_model(small_encoder_config):
    """随机初始化的小模型"""
    return ClospModel(small_encoder_config, np.random.default_rng(0))


# ============================================================================
# 自动使用的 Fixtures
# ============================================================================

@pytest.fixture(autouse=True)
def quiet_logger():
    """测试期间只保留 WARNING 以上的 loguru 输出"""
    logger.remove()
    handler_id = logger.add(sys.stderr, level="WARNING")
    yield
    logger.remove(handler_id)
