"""
误差通道参数映射

- ADC：振幅阻尼 + 相位阻尼的 Pauli twirl，输入 (T1, T2, t)
- SDC：由平均门保真度换算的对称退极化概率
"""

import math
from typing import Tuple

from auto_noise.errors import ValidationError

SDC1_MAX = 3.0 / 4.0
SDC2_MAX = 15.0 / 16.0


def adc_from_decoherence(
    t1_us: float, t2_us: float, t_ns: float
) -> Tuple[float, float, float]:
    """
    T1/T2 退相干 → 非对称退极化通道

    px = py = (1 - e^{-t/T1}) / 4
    pz = (1 - e^{-t/T2}) / 2 - (1 - e^{-t/T1}) / 4，T2 > 2·T1 时截断为 0

    Args:
        t1_us: 弛豫时间（微秒，允许 +inf）
        t2_us: 退相位时间（微秒，允许 +inf）
        t_ns: 门或空闲时长（纳秒）

    Returns:
        (px, py, pz)
    """
    if not (t1_us > 0) or not (t2_us > 0):
        raise ValidationError(f"T1/T2 必须大于 0: t1={t1_us}, t2={t2_us}")
    if t_ns < 0:
        raise ValidationError(f"时长必须 ≥ 0: t={t_ns}")
    if t_ns == 0:
        return 0.0, 0.0, 0.0
    t_us = t_ns / 1000.0
    decay_1 = -math.expm1(-t_us / t1_us)
    decay_2 = -math.expm1(-t_us / t2_us)
    px = decay_1 / 4.0
    pz = max(0.0, decay_2 / 2.0 - decay_1 / 4.0)
    return px, px, pz


def sdc_from_fidelity(f: float, arity: int) -> float:
    """
    平均门保真度 → 对称退极化总概率

    单比特 F = 1 - 2p/3，p 均分到 X/Y/Z；两比特 F = 1 - 4p/5，p 均分到 15 个非平凡 Pauli。
    """
    if not (f > 0) or f > 1:
        raise ValidationError(f"保真度必须 ∈ (0, 1]: f={f}")
    if arity == 1:
        return min(max(1.5 * (1.0 - f), 0.0), SDC1_MAX)
    if arity == 2:
        return min(max(1.25 * (1.0 - f), 0.0), SDC2_MAX)
    raise ValidationError(f"arity 只能为 1 或 2: {arity}")
