"""
Index files (magic CLSI) on top of the binary container.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
from loguru import logger

from config import constants
from core.errors import FormatError
from core.vocabulary import VOCABULARY, Modality
from retrieval.index import EmbeddingIndex
from storage.container import ContainerHeader, read_container, write_container


def save_index(path: Union[str, Path], index: EmbeddingIndex) -> Path:
    """写出索引；标签以词表顺序的字符串列表保存"""
    provenance = index.provenance
    header = ContainerHeader(
        magic=constants.INDEX_MAGIC,
        version=constants.CONTAINER_VERSION,
        embed_dim=index.embed_dim,
        image_side=int(provenance.get("image_side", 0)),
        sh_degree=int(provenance.get("sh_degree", 0)),
    )
    blocks = {
        "meta": {"provenance": provenance, "count": len(index)},
        "ids": index.ids,
        "modalities": [m.value for m in index.modalities],
        "vectors": index.vectors,
        "lon": index.lon,
        "lat": index.lat,
        "labels": [VOCABULARY.sorted(labels) for labels in index.labels],
    }
    path = write_container(path, header, blocks)
    logger.info(f"Saved index of {len(index)} records -> {path}")
    return path


def load_index(path: Union[str, Path]) -> EmbeddingIndex:
    """
    读取索引

    Raises:
        DataError: 文件不存在
        FormatError: 容器头不符或内容缺失
    """
    header, blocks = read_container(path, constants.INDEX_MAGIC)
    try:
        vectors = np.asarray(blocks["vectors"], dtype=np.float64).reshape(-1, header.embed_dim)
        index = EmbeddingIndex(
            ids=blocks["ids"],
            modalities=[Modality.from_string(m) for m in blocks["modalities"]],
            vectors=vectors,
            lon=blocks["lon"],
            lat=blocks["lat"],
            labels=[frozenset(labels) for labels in blocks["labels"]],
            provenance=blocks["meta"]["provenance"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{path}: malformed index: {exc}") from exc
    logger.info(f"Loaded index of {len(index)} records from {path}")
    return index
