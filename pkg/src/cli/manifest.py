"""
Run Manifest
============

每个命令都会写出一份 YAML 运行清单: 命令名、完整参数、配置快照、种子、输入输出路径、
工具版本与耗时。``replay`` 命令按清单中的参数重新执行同一命令。
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from loguru import logger

from config import constants
from core.errors import ConfigError


@dataclass
class RunManifest:
    """
    运行清单

    Attributes:
        command: 子命令名
        argv: 子命令及其参数 (不含全局日志参数)，replay 时原样使用
        config: 生效配置的快照
        seed: 使用的种子
        inputs: 输入路径
        outputs: 输出路径
        tool_version: 工具版本
        duration_s: 耗时 (秒)
    """
    command: str
    argv: List[str]
    config: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    tool_version: str = f"{constants.APP_NAME} {constants.APP_VERSION}"
    duration_s: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown manifest keys: {sorted(unknown)}")
        if "command" not in data or "argv" not in data:
            raise ConfigError("Manifest must record 'command' and 'argv'")
        return cls(**data)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            yaml.safe_dump(self.to_dict(), f, sort_keys=True, allow_unicode=True, default_flow_style=False)
        logger.info(f"Wrote run manifest -> {path}")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunManifest":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Manifest not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as exc:
                raise ConfigError(f"Malformed manifest {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"Manifest {path} is not a mapping")
        return cls.from_dict(data)


class Stopwatch:
    """记录命令耗时"""

    def __init__(self):
        self.start = time.perf_counter()

    def elapsed(self) -> float:
        return round(time.perf_counter() - self.start, 3)


def manifest_path(output: Union[str, Path], command: str) -> Path:
    """目录输出写到目录内，文件输出写到文件旁"""
    output = Path(output)
    if output.suffix == "" or output.is_dir():
        return output / f"{command}{constants.MANIFEST_SUFFIX}"
    return output.with_name(output.name + constants.MANIFEST_SUFFIX)
