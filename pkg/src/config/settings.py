"""
配置加载
========

- 应用配置 (config/config.yaml): 任意嵌套的 YAML，按需读取
- 运行配置 (语料生成、训练): 扁平的 ``key: value`` 映射，键必须与配置数据类字段一一对应，
  未知键、嵌套值或类型不符时抛出带行号的 ConfigError
"""

from __future__ import annotations

import dataclasses
import typing
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, Union

import yaml
from loguru import logger

from core.errors import ConfigError


PROJECT_ROOT = Path(__file__).resolve().parents[2]
DEFAULT_APP_CONFIG = PROJECT_ROOT / "config" / "config.yaml"


def load_app_config(path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    加载应用配置

    Args:
        path: 配置文件路径，默认为 config/config.yaml

    Returns:
        配置字典；文件不存在时返回空字典
    """
    config_path = Path(path) if path else DEFAULT_APP_CONFIG
    if not config_path.exists():
        logger.warning(f"配置文件不存在: {config_path}")
        return {}
    with open(config_path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    return data or {}


def config_schema(cls: Type) -> Dict[str, Tuple[type, bool]]:
    """由数据类字段推导扁平配置的类型表: name -> (type, nullable)"""
    hints = typing.get_type_hints(cls)
    schema: Dict[str, Tuple[type, bool]] = {}
    for f in dataclasses.fields(cls):
        hint = hints[f.name]
        nullable = False
        if typing.get_origin(hint) is Union:
            args = [a for a in typing.get_args(hint) if a is not type(None)]
            nullable = len(args) != len(typing.get_args(hint))
            hint = args[0]
        schema[f.name] = (hint, nullable)
    return schema


def load_flat_config(path: Union[str, Path], schema: Dict[str, Tuple[type, bool]]) -> Dict[str, Any]:
    """
    读取扁平运行配置

    Args:
        path: YAML 文件路径
        schema: 字段类型表，见 config_schema

    Returns:
        通过校验的键值字典 (仅包含文件中出现的键)

    Raises:
        ConfigError: 文件缺失、语法错误、未知键、重复键、嵌套值或类型不符
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Config file not found: {config_path}")

    text = config_path.read_text(encoding="utf-8")
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        values = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"Malformed config: {exc}", line=mark.line + 1 if mark else None) from exc

    if root is None:
        return {}
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("Config must be a flat key: value mapping", line=root.start_mark.line + 1)

    lines: Dict[str, int] = {}
    for key_node, _ in root.value:
        line = key_node.start_mark.line + 1
        if key_node.value in lines:
            raise ConfigError(f"Duplicate key '{key_node.value}'", line=line)
        lines[key_node.value] = line

    result: Dict[str, Any] = {}
    for key, value in values.items():
        line = lines.get(str(key))
        if key not in schema:
            raise ConfigError(f"Unknown key '{key}'", line=line)
        result[key] = _coerce(key, value, *schema[key], line=line)
    return result


def _coerce(key: str, value: Any, kind: type, nullable: bool, line: Optional[int]) -> Any:
    """按字段类型校验单个值"""
    if value is None:
        if nullable:
            return None
        raise ConfigError(f"Key '{key}' must not be empty", line=line)
    if isinstance(value, (dict, list)):
        raise ConfigError(f"Key '{key}' must be a flat value, not nested", line=line)

    if kind is bool:
        if isinstance(value, bool):
            return value
    elif kind is int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
    elif kind is float:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        # PyYAML 把 "1e-4" 这类无小数点的科学计数法解析成字符串
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
    elif kind is str:
        if isinstance(value, str):
            return value
    else:
        return value
    raise ConfigError(f"Key '{key}' expects {kind.__name__}, got {value!r}", line=line)
