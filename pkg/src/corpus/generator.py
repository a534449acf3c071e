"""
Synthetic Corpus Generator
==========================

合成的 SAR / MSI 标注语料库，用于在桌面规模上替代真实的卫星影像语料。

每个样本:
1. 按权重选择一个地理区域，在其经纬度框内均匀采样位置
2. 按区域标签先验采样 1–5 个标签 (灾害区域强制包含对应的灾害标签)
3. 每个标签向图像注入固定的逐模态通道特征 × 空间斑块纹理，
   区域本身再叠加一个弱的背景色调
4. SAR 图像乘以 Gamma 相干斑噪声，MSI 图像加高斯噪声

区域先验是固定常量:
- snow and ice 只出现在 |lat| >= 55 的区域
- earthquake damage 只出现在 6 个固定的地震热点
- trees / crops 在多数区域都有
"""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from loguru import logger

from config import constants
from config.settings import config_schema, load_flat_config
from core.errors import ConfigError, ContractError
from core.seeding import substream
from core.vocabulary import LABELS, VOCABULARY, CrisisType, Modality
from corpus.data_model import Corpus, CorpusItem


# ============================================================================
# 配置
# ============================================================================

@dataclass
class GeneratorConfig:
    """
    语料生成配置

    Attributes:
        n_sar: SAR 样本数
        n_msi: MSI 样本数
        image_side: 图像边长 H
        max_labels: 每个样本的最大标签数 (1..5)
        sar_looks: SAR 相干斑的视数 (Gamma 形状参数)
        msi_noise: MSI 加性高斯噪声标准差
        signature_strength: 标签特征强度
        region_tint: 区域背景色调的幅度
        train_fraction: gen-corpus 写出划分时的训练比例
        seed: 随机种子
    """
    n_sar: int = 1000
    n_msi: int = 1000
    image_side: int = constants.DEFAULT_IMAGE_SIDE
    max_labels: int = 5
    sar_looks: float = 4.0
    msi_noise: float = 0.05
    signature_strength: float = 1.0
    region_tint: float = 0.2
    train_fraction: float = constants.DEFAULT_TRAIN_FRACTION
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.n_sar < 0 or self.n_msi < 0:
            raise ContractError(f"item counts must be non-negative, got ({self.n_sar}, {self.n_msi})")
        if self.n_sar + self.n_msi == 0:
            raise ContractError("generator item count is zero")
        if self.image_side < 8:
            raise ContractError(f"image_side must be >= 8, got {self.image_side}")
        if not 1 <= self.max_labels <= 5:
            raise ContractError(f"max_labels must lie in [1, 5], got {self.max_labels}")
        if self.sar_looks <= 0 or self.msi_noise < 0 or self.signature_strength <= 0 or self.region_tint < 0:
            raise ContractError("noise and signature parameters must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ContractError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GeneratorConfig":
        return cls(**data)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "GeneratorConfig":
        """读取扁平 YAML 配置，校验失败抛出 ConfigError"""
        values = load_flat_config(path, config_schema(cls))
        try:
            return cls.from_dict(values)
        except ContractError as exc:
            raise ConfigError(f"{path}: {exc}") from exc


# ============================================================================
# 区域先验
# ============================================================================

Box = Tuple[float, float, float, float]  # lon_min, lon_max, lat_min, lat_max


@dataclass(frozen=True)
class Region:
    """地理区域: 一个或多个经纬度框、标签先验权重、采样权重、可选灾害类型"""
    name: str
    boxes: Tuple[Box, ...]
    priors: Dict[str, float]
    weight: float
    crisis: Optional[CrisisType] = None


def _hotspot(lon: float, lat: float, jitter: float = 0.5) -> Box:
    return (lon - jitter, lon + jitter, lat - jitter, lat + jitter)


EARTHQUAKE_HOTSPOTS: Tuple[Tuple[float, float], ...] = (
    (37.2, 37.0),     # 安纳托利亚东部
    (141.0, 38.3),    # 日本东北
    (-72.7, -36.1),   # 智利中部
    (84.7, 28.2),     # 尼泊尔
    (13.3, 42.35),    # 意大利中部
    (-72.5, 18.45),   # 海地
)

REGIONS: Tuple[Region, ...] = (
    Region("temperate_europe", ((-10.0, 30.0, 42.0, 54.0),),
           {"crops": 0.30, "trees": 0.25, "grass": 0.20, "built": 0.15, "water": 0.10}, 0.17),
    Region("north_america", ((-120.0, -75.0, 30.0, 50.0),),
           {"crops": 0.30, "grass": 0.25, "trees": 0.20, "built": 0.15, "water": 0.10}, 0.12),
    Region("boreal", ((-160.0, 170.0, 56.0, 72.0),),
           {"trees": 0.30, "snow and ice": 0.25, "water": 0.20, "bare": 0.10,
            "shrub and scrub": 0.10, "flooded vegetation": 0.05}, 0.12),
    Region("southern_cold", ((-75.0, -60.0, -60.0, -55.0),),
           {"snow and ice": 0.35, "bare": 0.25, "water": 0.25, "shrub and scrub": 0.15}, 0.05),
    Region("tropical_forest", ((-75.0, -45.0, -15.0, 5.0),),
           {"trees": 0.45, "flooded vegetation": 0.15, "water": 0.15, "crops": 0.15, "grass": 0.10}, 0.12),
    Region("arid", ((-10.0, 40.0, 15.0, 30.0),),
           {"bare": 0.55, "shrub and scrub": 0.25, "built": 0.10, "crops": 0.10}, 0.10),
    Region("monsoon_asia", ((75.0, 120.0, 10.0, 30.0),),
           {"crops": 0.35, "built": 0.20, "flooded vegetation": 0.15, "water": 0.15, "trees": 0.15}, 0.10),
    Region("australia", ((115.0, 150.0, -35.0, -20.0),),
           {"shrub and scrub": 0.35, "bare": 0.25, "grass": 0.20, "trees": 0.10, "crops": 0.10}, 0.07),
    Region("flood_plains", ((0.0, 30.0, 44.0, 52.0), (88.0, 92.0, 22.0, 26.0)),
           {"water": 0.30, "crops": 0.25, "flooded vegetation": 0.20, "trees": 0.15, "grass": 0.10},
           0.06, CrisisType.FLOOD),
    Region("fire_zones", ((-124.0, -117.0, 33.0, 42.0), (20.0, 28.0, 36.0, 41.0), (140.0, 152.0, -38.0, -30.0)),
           {"shrub and scrub": 0.35, "trees": 0.30, "grass": 0.20, "bare": 0.15},
           0.05, CrisisType.WILDFIRE),
    Region("seismic_hotspots", tuple(_hotspot(lon, lat) for lon, lat in EARTHQUAKE_HOTSPOTS),
           {"built": 0.40, "bare": 0.25, "trees": 0.20, "crops": 0.15},
           0.04, CrisisType.EARTHQUAKE),
)

SIGNATURE_SEED = 20240712


def label_signatures(modality: Modality) -> np.ndarray:
    """
    每个标签的固定通道特征, 形状 12×C

    与语料种子无关；SAR 特征为正值，保证相干斑前强度为正。
    """
    rng = np.random.default_rng([SIGNATURE_SEED, 0 if modality is Modality.SAR else 1])
    low = 0.2 if modality is Modality.SAR else 0.0
    return rng.uniform(low, 1.0, size=(len(LABELS), modality.channels))


def region_tints(modality: Modality) -> np.ndarray:
    """每个区域的固定背景色调 (未缩放), 形状 R×C, 取值 [0, 1)"""
    rng = np.random.default_rng([SIGNATURE_SEED, 2, 0 if modality is Modality.SAR else 1])
    return rng.uniform(0.0, 1.0, size=(len(REGIONS), modality.channels))


def label_texture(label_index: int) -> Tuple[float, float]:
    """标签纹理: (条纹方向角, 每幅图像的周期数)"""
    return np.pi * label_index / len(LABELS), float(1 + label_index % 4)


# ============================================================================
# 生成
# ============================================================================

class _ImageSynthesizer:
    """按模态缓存特征表与像素网格"""

    BASE_LEVEL = 0.1

    def __init__(self, config: GeneratorConfig):
        self.config = config
        side = config.image_side
        self.ys, self.xs = np.mgrid[0:side, 0:side].astype(np.float64)
        self.signatures = {m: label_signatures(m) for m in Modality}
        self.tints = {m: region_tints(m) * config.region_tint for m in Modality}

    def pattern(self, label_index: int, rng: np.random.Generator) -> np.ndarray:
        side = self.config.image_side
        cx, cy = rng.uniform(0.0, side, size=2)
        radius = rng.uniform(0.25, 0.45) * side
        blob = np.exp(-((self.xs - cx) ** 2 + (self.ys - cy) ** 2) / (2.0 * radius ** 2))
        theta, cycles = label_texture(label_index)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        along = self.xs * np.cos(theta) + self.ys * np.sin(theta)
        texture = 0.6 + 0.4 * np.cos(2.0 * np.pi * cycles * along / side + phase)
        return blob * texture

    def render(self, modality: Modality, region_index: int, labels: List[str],
               rng: np.random.Generator) -> np.ndarray:
        side = self.config.image_side
        base = self.BASE_LEVEL + self.tints[modality][region_index]
        image = np.broadcast_to(base[:, None, None], (modality.channels, side, side)).copy()
        for label in labels:
            index = VOCABULARY.index(label)
            signature = self.signatures[modality][index] * self.config.signature_strength
            image += signature[:, None, None] * self.pattern(index, rng)[None, :, :]
        if modality is Modality.SAR:
            looks = self.config.sar_looks
            image *= rng.gamma(looks, 1.0 / looks, size=image.shape)
        else:
            image += rng.normal(0.0, self.config.msi_noise, size=image.shape)
        return image


def _sample_labels(region: Region, max_labels: int, rng: np.random.Generator) -> List[str]:
    pool = [label for label, weight in region.priors.items() if weight > 0]
    weights = np.array([region.priors[label] for label in pool], dtype=np.float64)
    forced = [region.crisis.label] if region.crisis else []
    count = int(rng.integers(1, max_labels + 1)) - len(forced)
    count = max(0, min(count, len(pool)))
    if count == 0:
        return forced
    chosen = rng.choice(len(pool), size=count, replace=False, p=weights / weights.sum())
    return forced + [pool[i] for i in sorted(chosen)]


def _sample_location(region: Region, rng: np.random.Generator) -> Tuple[float, float]:
    lon_min, lon_max, lat_min, lat_max = region.boxes[int(rng.integers(len(region.boxes)))]
    return float(rng.uniform(lon_min, lon_max)), float(rng.uniform(lat_min, lat_max))


def generate_synthetic_corpus(config: GeneratorConfig, seed: Optional[int] = None) -> Corpus:
    """
    生成合成语料库

    Args:
        config: 生成配置
        seed: 覆盖 config.seed

    Returns:
        Corpus，SAR 样本 id 在前 (0..n_sar-1)，MSI 样本随后

    Raises:
        ContractError: 样本总数为 0
    """
    config.validate()
    seed = config.seed if seed is None else seed
    rng = substream(seed, "generator")
    synth = _ImageSynthesizer(config)
    region_weights = np.array([r.weight for r in REGIONS], dtype=np.float64)
    region_weights /= region_weights.sum()

    items: List[CorpusItem] = []
    region_counts: Counter = Counter()
    plan = [Modality.SAR] * config.n_sar + [Modality.MSI] * config.n_msi
    for item_id, modality in enumerate(plan):
        region_index = int(rng.choice(len(REGIONS), p=region_weights))
        region = REGIONS[region_index]
        lon, lat = _sample_location(region, rng)
        labels = _sample_labels(region, config.max_labels, rng)
        image = synth.render(modality, region_index, labels, rng)
        items.append(CorpusItem(
            id=item_id,
            modality=modality,
            image=image,
            labels=frozenset(labels),
            lon=lon,
            lat=lat,
            crisis=region.crisis,
            source=f"synthetic:{region.name}",
        ))
        region_counts[region.name] += 1

    marginals = Counter(label for item in items for label in item.labels)
    metadata = {
        "seed": int(seed),
        "generator": config.to_dict(),
        "modality_counts": {"SAR": config.n_sar, "MSI": config.n_msi},
        "label_marginals": {label: int(marginals.get(label, 0)) for label in LABELS},
        "region_counts": {region.name: int(region_counts.get(region.name, 0)) for region in REGIONS},
    }
    logger.info(
        f"Generated synthetic corpus: {len(items)} items "
        f"({config.n_sar} SAR, {config.n_msi} MSI), H={config.image_side}, seed={seed}"
    )
    return Corpus(tuple(items), metadata)
