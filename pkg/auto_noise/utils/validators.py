"""
验证工具
"""

import math

from auto_noise.errors import ValidationError


def check_probability(
    value: float, name: str, *, upper: float = 1.0, inclusive_upper: bool = False
) -> float:
    """
    校验概率取值

    Args:
        value: 待校验的值
        name: 字段名（写入错误信息）
        upper: 上界
        inclusive_upper: 上界是否可取到

    Returns:
        原值（float）
    """
    v = float(value)
    ok_upper = v <= upper if inclusive_upper else v < upper
    if math.isnan(v) or v < 0.0 or not ok_upper:
        bracket = "]" if inclusive_upper else ")"
        raise ValidationError(f"{name}={value} 超出范围 [0, {upper}{bracket}")
    return v


def check_positive(value: float, name: str) -> float:
    """校验严格为正（允许 +inf，表示无衰减）"""
    v = float(value)
    if math.isnan(v) or v <= 0.0:
        raise ValidationError(f"{name}={value} 必须大于 0")
    return v


def check_fidelity(value: float, name: str) -> float:
    """校验保真度 ∈ (0, 1]"""
    v = float(value)
    if math.isnan(v) or v <= 0.0 or v > 1.0:
        raise ValidationError(f"{name}={value} 超出范围 (0, 1]")
    return v
