"""
Corpus Files
============

语料库目录布局:

    metadata.jsonl   每行一个样本的元数据 (键排序、紧凑分隔符)，按 id 升序
    images_sar.bin   SAR 图像
    images_msi.bin   MSI 图像
    summary.json     生成器元数据 (标签边际分布等)
    split.json       可选的训练 / 检索划分

图像文件: 头部 struct "<4sHIII" (magic CLSC, version, count, C, H)，
随后是按 id 升序排列的 count 个 C×H×H 小端 float64 行主序数组。
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from loguru import logger

from config import constants
from core.errors import DataError, FormatError
from core.vocabulary import Modality
from corpus.data_model import Corpus, CorpusItem, SplitResult


IMAGE_HEADER_FORMAT = "<4sHIII"
IMAGE_HEADER_SIZE = struct.calcsize(IMAGE_HEADER_FORMAT)
SUMMARY_FILE = "summary.json"
_FLOAT = np.dtype("<f8")


def _dumps(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


# ============================================================================
# 写
# ============================================================================

def write_corpus(corpus: Corpus, out_dir: Union[str, Path]) -> Path:
    """
    写出语料库目录 (已存在的同名文件被覆盖)

    Returns:
        目录路径
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with open(out_dir / constants.CORPUS_METADATA_FILE, "w", encoding="utf-8", newline="\n") as f:
        for item in corpus:
            f.write(_dumps(item.to_dict()) + "\n")

    side = corpus.image_side if len(corpus) else 0
    for modality in Modality:
        items = corpus.of_modality(modality)
        with open(out_dir / constants.CORPUS_IMAGE_FILES[modality.value], "wb") as f:
            f.write(struct.pack(IMAGE_HEADER_FORMAT, constants.CORPUS_IMAGE_MAGIC,
                                constants.CORPUS_FORMAT_VERSION, len(items), modality.channels, side))
            for item in items:
                f.write(item.image.astype(_FLOAT, copy=False).tobytes())

    (out_dir / SUMMARY_FILE).write_text(_dumps(corpus.metadata) + "\n", encoding="utf-8")
    logger.info(f"Wrote corpus of {len(corpus)} items -> {out_dir}")
    return out_dir


def write_split(split: SplitResult, out_dir: Union[str, Path]) -> Path:
    path = Path(out_dir) / constants.CORPUS_SPLIT_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_dumps(split.to_dict()) + "\n", encoding="utf-8")
    return path


# ============================================================================
# 读
# ============================================================================

def _read_images(path: Path, modality: Modality) -> np.ndarray:
    if not path.is_file():
        raise DataError(f"Corpus image file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < IMAGE_HEADER_SIZE:
        raise FormatError(f"{path}: truncated header")
    magic, version, count, channels, side = struct.unpack(IMAGE_HEADER_FORMAT, raw[:IMAGE_HEADER_SIZE])
    if magic != constants.CORPUS_IMAGE_MAGIC or version != constants.CORPUS_FORMAT_VERSION:
        raise FormatError(
            f"{path}: unsupported image file",
            expected=f"{constants.CORPUS_IMAGE_MAGIC.decode()} v{constants.CORPUS_FORMAT_VERSION}",
            found=f"{magic.decode('ascii', errors='replace')} v{version}",
        )
    if channels != modality.channels:
        raise FormatError(f"{path}: {modality.value} file holds {channels} channels")
    payload = raw[IMAGE_HEADER_SIZE:]
    expected = count * channels * side * side * _FLOAT.itemsize
    if len(payload) != expected:
        raise FormatError(f"{path}: payload of {len(payload)} bytes, expected {expected}")
    return np.frombuffer(payload, dtype=_FLOAT).reshape(count, channels, side, side).astype(np.float64)


def read_corpus(corpus_dir: Union[str, Path]) -> Corpus:
    """
    读取语料库目录

    Raises:
        DataError: 目录或文件缺失、元数据与图像数量不符
        FormatError: 图像文件头不符
    """
    corpus_dir = Path(corpus_dir)
    metadata_path = corpus_dir / constants.CORPUS_METADATA_FILE
    if not metadata_path.is_file():
        raise DataError(f"Corpus metadata not found: {metadata_path}")

    rows: List[Dict[str, Any]] = []
    with open(metadata_path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{metadata_path}:{number}: {exc}") from exc

    images = {m: _read_images(corpus_dir / constants.CORPUS_IMAGE_FILES[m.value], m) for m in Modality}
    cursor = {m: 0 for m in Modality}
    items: List[CorpusItem] = []
    for row in sorted(rows, key=lambda r: int(r["id"])):
        modality = Modality.from_string(row.get("modality", ""))
        if modality is None:
            raise DataError(f"item {row.get('id')}: unknown modality {row.get('modality')!r}")
        if cursor[modality] >= images[modality].shape[0]:
            raise DataError(f"{modality.value} image file holds fewer images than the metadata lists")
        items.append(CorpusItem.from_dict(row, images[modality][cursor[modality]]))
        cursor[modality] += 1
    for modality in Modality:
        if cursor[modality] != images[modality].shape[0]:
            raise DataError(f"{modality.value} image file holds {images[modality].shape[0]} images, "
                            f"metadata lists {cursor[modality]}")

    summary_path = corpus_dir / SUMMARY_FILE
    metadata = json.loads(summary_path.read_text(encoding="utf-8")) if summary_path.is_file() else {}
    corpus = Corpus(tuple(items), metadata)
    logger.info(f"Read corpus of {len(corpus)} items from {corpus_dir}")
    return corpus


def read_split(corpus_dir: Union[str, Path]) -> SplitResult:
    path = Path(corpus_dir) / constants.CORPUS_SPLIT_FILE
    if not path.is_file():
        raise DataError(f"Split file not found: {path}")
    return SplitResult.from_dict(json.loads(path.read_text(encoding="utf-8")))
