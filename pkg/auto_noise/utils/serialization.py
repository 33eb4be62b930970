"""
序列化工具
"""

import hashlib
import json
import math
from enum import Enum
from typing import Any

import numpy as np


def _default(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Enum):
        return obj.value
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if isinstance(obj, (set, frozenset, tuple)):
        return list(obj)
    raise TypeError(f"无法序列化类型: {type(obj).__name__}")


def _sanitize(obj: Any) -> Any:
    """NaN/Inf 不是合法 JSON，统一写成 null"""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def to_json(obj: Any) -> str:
    """对象转 JSON 字符串（键排序，保证相同输入字节一致）"""
    plain = json.loads(json.dumps(obj, default=_default, allow_nan=True))
    return json.dumps(
        _sanitize(plain), ensure_ascii=False, indent=2, sort_keys=True, allow_nan=False
    )


def from_json(json_str: str) -> Any:
    """JSON 字符串转对象"""
    return json.loads(json_str)


def config_hash(obj: Any) -> str:
    """配置摘要：规范化 JSON 的 sha256 前 16 位"""
    canonical = json.dumps(
        json.loads(json.dumps(obj, default=_default)),
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
