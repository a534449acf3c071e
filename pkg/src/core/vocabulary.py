"""
Label Vocabulary
================

12 类协调标签 (Dynamic World 9 类 + 3 类灾害标签) 以及模态、灾害类型枚举。

标签顺序即规范顺序，所有集合运算、查询渲染和多热编码都以此顺序为准。
"""

from __future__ import annotations

import hashlib
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Tuple

from core.errors import ContractError, VocabularyError


# ============================================================================
# 枚举
# ============================================================================

class Modality(Enum):
    """图像模态"""
    SAR = "SAR"
    MSI = "MSI"

    @property
    def channels(self) -> int:
        """通道数: SAR 为 VV/VH 两个极化, MSI 为 12 个波段"""
        return 2 if self is Modality.SAR else 12

    @classmethod
    def from_string(cls, value: str, default: Optional["Modality"] = None) -> Optional["Modality"]:
        """
        通过字符串获取模态（不区分大小写）

        Examples:
            >>> Modality.from_string("sar")
            <Modality.SAR: 'SAR'>
            >>> Modality.from_string("optical") is None
            True
        """
        if not value:
            return default
        value_upper = value.strip().upper()
        for member in cls:
            if member.value == value_upper:
                return member
        return default


class CrisisType(Enum):
    """灾害事件类型，每种类型对应一个灾害标签"""
    WILDFIRE = "wildfire"
    FLOOD = "flood"
    EARTHQUAKE = "earthquake"

    @property
    def label(self) -> str:
        return _CRISIS_LABELS[self]

    @classmethod
    def from_string(cls, value: Optional[str], default: Optional["CrisisType"] = None) -> Optional["CrisisType"]:
        if not value:
            return default
        value_lower = value.strip().lower()
        for member in cls:
            if member.value == value_lower:
                return member
        return default


_CRISIS_LABELS = {
    CrisisType.FLOOD: "flooded area",
    CrisisType.WILDFIRE: "burned area",
    CrisisType.EARTHQUAKE: "earthquake damage",
}


# ============================================================================
# 标签词表
# ============================================================================

LABELS: Tuple[str, ...] = (
    "trees",
    "crops",
    "shrub and scrub",
    "water",
    "grass",
    "built",
    "flooded vegetation",
    "bare",
    "snow and ice",
    "flooded area",
    "earthquake damage",
    "burned area",
)

QUERY_SEPARATOR = ". "


class LabelVocabulary:
    """
    固定的 12 类标签词表

    查找时先去除首尾空白再忽略大小写；索引与 LABELS 的顺序一致。
    """

    def __init__(self, labels: Iterable[str] = LABELS):
        self._labels: Tuple[str, ...] = tuple(labels)
        if len(self._labels) != 12:
            raise ContractError(f"vocabulary must hold 12 labels, got {len(self._labels)}")
        self._index = {label: i for i, label in enumerate(self._labels)}

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self):
        return iter(self._labels)

    def __contains__(self, label: object) -> bool:
        return isinstance(label, str) and label.strip().lower() in self._index

    @property
    def labels(self) -> Tuple[str, ...]:
        return self._labels

    def normalize(self, label: str) -> str:
        """返回规范形式的标签，未知标签抛出 VocabularyError"""
        key = label.strip().lower() if isinstance(label, str) else label
        if key not in self._index:
            raise VocabularyError(f"Unknown label: {label!r}")
        return key

    def index(self, label: str) -> int:
        return self._index[self.normalize(label)]

    def label_set(self, labels: Iterable[str]) -> FrozenSet[str]:
        """规范化一组标签; 空集合抛出 ContractError"""
        normalized = frozenset(self.normalize(label) for label in labels)
        if not normalized:
            raise ContractError("label set must be non-empty")
        return normalized

    def sorted(self, labels: Iterable[str]) -> List[str]:
        """按词表顺序排序"""
        return sorted({self.normalize(label) for label in labels}, key=self._index.__getitem__)

    def indices(self, labels: Iterable[str]) -> Tuple[int, ...]:
        return tuple(self._index[label] for label in self.sorted(labels))

    def render(self, labels: Iterable[str]) -> str:
        """
        规范文本渲染: 按词表顺序、首字母大写、以 ". " 连接

        Examples:
            >>> VOCABULARY.render({"shrub and scrub", "flooded vegetation"})
            'Shrub and scrub. Flooded vegetation'
        """
        return QUERY_SEPARATOR.join(label.capitalize() for label in self.sorted(labels))

    def parse(self, text: str) -> FrozenSet[str]:
        """
        解析查询字符串

        同时接受 ". " 连接的规范形式和逗号分隔形式，末尾的句点会被忽略。
        """
        if text is None or not text.strip():
            raise ContractError("query string is empty")
        body = text.strip().rstrip(".")
        if "," in body:
            parts = body.split(",")
        else:
            parts = body.split(".")
        return self.label_set(part for part in parts if part.strip())

    def digest(self) -> str:
        """词表哈希，用于检查检查点与语料库是否兼容"""
        return hashlib.sha256("|".join(self._labels).encode("utf-8")).hexdigest()[:16]


VOCABULARY = LabelVocabulary()
