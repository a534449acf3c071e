"""
Binary Container
================

检查点与索引共用的二进制容器格式:

    header  : struct "<4sHIII"  (magic, version, D, H, L)   小端
    length  : struct "<I"       (body 字节数)
    body    : MessagePack 编码的 {名称: 块}

数值块以 {"dtype", "shape", "data"} 保存，data 为小端原始字节，读写可逐位还原。
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import msgpack
import numpy as np
from loguru import logger

from config import constants
from core.errors import DataError, FormatError


HEADER_FORMAT = "<4sHIII"
HEADER_SIZE = struct.calcsize(HEADER_FORMAT)
LENGTH_FORMAT = "<I"
LENGTH_SIZE = struct.calcsize(LENGTH_FORMAT)

_ARRAY_TAG = "__ndarray__"


@dataclass(frozen=True)
class ContainerHeader:
    """
    容器头

    Attributes:
        magic: 4 字节魔数 (CLSP 检查点 / CLSI 索引)
        version: 格式版本
        embed_dim: 嵌入维度 D
        image_side: 图像边长 H
        sh_degree: 球谐阶数 L
    """
    magic: bytes
    version: int
    embed_dim: int
    image_side: int
    sh_degree: int

    def pack(self) -> bytes:
        return struct.pack(HEADER_FORMAT, self.magic, self.version,
                           self.embed_dim, self.image_side, self.sh_degree)

    @classmethod
    def unpack(cls, raw: bytes) -> "ContainerHeader":
        magic, version, embed_dim, image_side, sh_degree = struct.unpack(HEADER_FORMAT, raw)
        return cls(magic, version, embed_dim, image_side, sh_degree)

    def describe(self) -> str:
        magic = self.magic.decode("ascii", errors="replace")
        return f"{magic} v{self.version} D={self.embed_dim} H={self.image_side} L={self.sh_degree}"


# ============================================================================
# 块编解码
# ============================================================================

def _encode(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        array = np.ascontiguousarray(value)
        return {
            _ARRAY_TAG: True,
            "dtype": array.dtype.newbyteorder("<").str,
            "shape": list(array.shape),
            "data": array.astype(array.dtype.newbyteorder("<"), copy=False).tobytes(),
        }
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _decode(value: Any) -> Any:
    if isinstance(value, dict):
        if value.get(_ARRAY_TAG):
            array = np.frombuffer(value["data"], dtype=np.dtype(value["dtype"]))
            return array.reshape(value["shape"]).copy()
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


# ============================================================================
# 读写
# ============================================================================

def write_container(path: Union[str, Path], header: ContainerHeader, blocks: Dict[str, Any]) -> Path:
    """
    写出容器文件

    Args:
        path: 目标路径 (父目录会被创建)
        header: 容器头
        blocks: {名称: 数组 | 标量 | 映射}

    Returns:
        写出的路径
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = msgpack.packb(_encode(blocks), use_bin_type=True)
    with open(path, "wb") as f:
        f.write(header.pack())
        f.write(struct.pack(LENGTH_FORMAT, len(body)))
        f.write(body)
    logger.debug(f"Wrote container {header.describe()} -> {path} ({len(body)} body bytes)")
    return path


def read_header(path: Union[str, Path]) -> ContainerHeader:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"File not found: {path}")
    with open(path, "rb") as f:
        raw = f.read(HEADER_SIZE)
    if len(raw) != HEADER_SIZE:
        raise FormatError(f"{path}: truncated header")
    return ContainerHeader.unpack(raw)


def read_container(path: Union[str, Path], magic: bytes) -> Tuple[ContainerHeader, Dict[str, Any]]:
    """
    读取容器文件

    Raises:
        DataError: 文件不存在
        FormatError: 魔数或版本不符、文件截断、消息体损坏
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"File not found: {path}")
    raw = path.read_bytes()
    if len(raw) < HEADER_SIZE + LENGTH_SIZE:
        raise FormatError(f"{path}: truncated header")

    header = ContainerHeader.unpack(raw[:HEADER_SIZE])
    if header.magic != magic or header.version != constants.CONTAINER_VERSION:
        expected = ContainerHeader(magic, constants.CONTAINER_VERSION,
                                   header.embed_dim, header.image_side, header.sh_degree)
        raise FormatError(f"{path}: unsupported container",
                          expected=expected.describe(), found=header.describe())

    (length,) = struct.unpack(LENGTH_FORMAT, raw[HEADER_SIZE:HEADER_SIZE + LENGTH_SIZE])
    body = raw[HEADER_SIZE + LENGTH_SIZE:]
    if len(body) != length:
        raise FormatError(f"{path}: body length {len(body)} does not match header {length}")
    try:
        blocks = msgpack.unpackb(body, raw=False)
    except (msgpack.ExtraData, msgpack.FormatError, ValueError) as exc:
        raise FormatError(f"{path}: corrupt body: {exc}") from exc
    return header, _decode(blocks)
