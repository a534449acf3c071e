"""
Error hierarchy
===============

统一的异常层次结构。所有模块抛出的领域错误都派生自 ClospError，
CLI 根据异常类型映射退出码 (2: 用法/配置/数据错误, 3: 数值错误)。
"""

from __future__ import annotations

from typing import Optional


class ClospError(RuntimeError):
    """Base class of every error raised by the pipeline."""


class DimensionError(ClospError):
    """Tensor extents do not line up (matmul inner sizes, empty rows...)."""


class ShapeError(ClospError):
    """Image channel count or spatial extent does not match its modality."""


class DegenerateInputError(ClospError):
    """Input is mathematically degenerate (zero vector, constant series)."""


class ContractError(ClospError):
    """A documented precondition of an operation was violated."""


class DomainError(ClospError):
    """A scalar argument lies outside its admissible range."""


class VocabularyError(ClospError):
    """Unknown label or CLC class name."""


class DataError(ClospError):
    """Corpus content cannot satisfy the request (too few items, missing files)."""


class NumericError(ClospError):
    """Non-finite value produced during evaluation or training."""

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message if step is None else f"{message} (step {step})")
        self.step = step


class ConfigError(ClospError):
    """Malformed configuration file or value."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class FormatError(ClospError):
    """Binary container is unreadable or incompatible with the current run."""

    def __init__(self, message: str, expected: str = "", found: str = ""):
        details = ""
        if expected or found:
            details = f" [expected: {expected}] [found: {found}]"
        super().__init__(f"{message}{details}")
        self.expected = expected
        self.found = found
