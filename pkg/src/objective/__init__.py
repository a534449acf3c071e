"""
objective
=========

CLOSP / GeoCLOSP 对比损失与可学习温度。
"""

from .losses import (
    BatchEmbeddings,
    anchored_cross_entropy,
    contrastive_components,
    contrastive_loss,
    geo_loss,
)
from .temperature import Temperature

__all__ = [
    "BatchEmbeddings",
    "anchored_cross_entropy",
    "contrastive_components",
    "contrastive_loss",
    "geo_loss",
    "Temperature",
]
