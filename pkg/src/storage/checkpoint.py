"""
Checkpoint files (magic CLSP) on top of the binary container.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

from loguru import logger

from config import constants
from storage.container import read_container, write_container
from trainer.checkpoint import ModelCheckpoint


def save_checkpoint(path: Union[str, Path], checkpoint: ModelCheckpoint) -> Path:
    """写出检查点；相同内容总是得到逐字节相同的文件"""
    path = write_container(path, checkpoint.header(), checkpoint.to_blocks())
    logger.info(f"Saved checkpoint {checkpoint.describe()} step={checkpoint.step} -> {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> ModelCheckpoint:
    """
    读取检查点

    Raises:
        DataError: 文件不存在
        FormatError: 魔数、版本或内容不符
    """
    header, blocks = read_container(path, constants.CHECKPOINT_MAGIC)
    checkpoint = ModelCheckpoint.from_blocks(header, blocks)
    logger.info(f"Loaded checkpoint {checkpoint.describe()} step={checkpoint.step} from {path}")
    return checkpoint
