"""
CLOSP Retrieval Core
====================

跨模态检索的公共基础: 异常体系、12 类标签词表、模态与灾害类型枚举、随机子流。
"""

from config.constants import APP_NAME, APP_ORG_NAME, APP_VERSION

__version__ = APP_VERSION
__author__ = "CLOSP Retrieval Team"

from .errors import (
    ClospError,
    ConfigError,
    ContractError,
    DataError,
    DegenerateInputError,
    DimensionError,
    DomainError,
    FormatError,
    NumericError,
    ShapeError,
    VocabularyError,
)
from .seeding import STREAMS, substream
from .vocabulary import LABELS, VOCABULARY, CrisisType, LabelVocabulary, Modality

__all__ = [
    "ClospError",
    "ConfigError",
    "ContractError",
    "DataError",
    "DegenerateInputError",
    "DimensionError",
    "DomainError",
    "FormatError",
    "NumericError",
    "ShapeError",
    "VocabularyError",
    "STREAMS",
    "substream",
    "LABELS",
    "VOCABULARY",
    "CrisisType",
    "LabelVocabulary",
    "Modality",
]
