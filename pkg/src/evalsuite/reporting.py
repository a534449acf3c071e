"""
Report writers: flat JSON, aligned text and CSV.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd


def write_json(path: Union[str, Path], data: Dict[str, Any]) -> Path:
    """键排序、两空格缩进的 JSON；相同内容得到相同字节"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def write_text(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def write_csv(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path
