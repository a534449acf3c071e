"""
CLC → Dynamic World Mapping
===========================

把 44 类 CORINE Land Cover 类别协调到 12 类标签词表。
映射表作为静态资源保存在 config/clc_mapping.yaml。
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Union

import yaml
from loguru import logger

from config.settings import PROJECT_ROOT
from core.errors import ConfigError, VocabularyError
from core.vocabulary import VOCABULARY


DEFAULT_MAPPING_FILE = PROJECT_ROOT / "config" / "clc_mapping.yaml"
CLC_CLASS_COUNT = 44


def _key(name: str) -> str:
    return " ".join(name.strip().lower().split())


def load_clc_mapping(path: Optional[Union[str, Path]] = None) -> Dict[str, str]:
    """
    读取映射表

    Returns:
        {规范化 CLC 类名: 词表标签}

    Raises:
        ConfigError: 文件缺失、格式错误、重复行或行数不是 44
    """
    mapping_path = Path(path) if path else DEFAULT_MAPPING_FILE
    if not mapping_path.is_file():
        raise ConfigError(f"CLC mapping file not found: {mapping_path}")
    with open(mapping_path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}

    rows = data.get("mapping")
    if not isinstance(rows, list):
        raise ConfigError(f"{mapping_path}: 'mapping' must be a list")

    table: Dict[str, str] = {}
    for row in rows:
        if not isinstance(row, dict) or "clc" not in row or "label" not in row:
            raise ConfigError(f"{mapping_path}: malformed row {row!r}")
        key = _key(str(row["clc"]))
        if key in table:
            raise ConfigError(f"{mapping_path}: duplicate CLC class {row['clc']!r}")
        try:
            table[key] = VOCABULARY.normalize(str(row["label"]))
        except VocabularyError as exc:
            raise ConfigError(f"{mapping_path}: {exc}") from exc

    if len(table) != CLC_CLASS_COUNT:
        raise ConfigError(f"{mapping_path}: expected {CLC_CLASS_COUNT} rows, found {len(table)}")
    logger.debug(f"Loaded {len(table)} CLC mapping rows from {mapping_path}")
    return table


@lru_cache(maxsize=1)
def _default_table() -> Dict[str, str]:
    return load_clc_mapping()


def map_clc_to_dw(clc_class: str) -> str:
    """
    CLC 类别 → 词表标签 (忽略大小写与首尾空白)

    Examples:
        >>> map_clc_to_dw("Rice fields")
        'flooded vegetation'
        >>> map_clc_to_dw("  sea and OCEAN ")
        'water'

    Raises:
        VocabularyError: 不在映射表中的类别
    """
    if not isinstance(clc_class, str):
        raise VocabularyError(f"Unknown CLC class: {clc_class!r}")
    table = _default_table()
    key = _key(clc_class)
    if key not in table:
        raise VocabularyError(f"Unknown CLC class: {clc_class!r}")
    return table[key]


def clc_classes() -> list:
    """映射表中的全部 CLC 类名 (规范化小写形式，按文件顺序)"""
    return list(_default_table())
